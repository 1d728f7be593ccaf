use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ball::BallIndex;
use crate::error::{Error, Result};
use crate::group::Group;
use crate::measure::FiniteMeasure;

/// Row-major sparse Hermitian matrix. Each row lists `(column, value)` in a
/// fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHermitian {
    pub dim: usize,
    pub rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseHermitian {
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.rows[i].iter().filter(|(c, _)| *c == j).map(|(_, v)| *v).sum()
    }

    /// Exact structural check `H[i][j] == conj(H[j][i])`.
    pub fn is_hermitian(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, row)| row.iter().all(|&(j, v)| self.entry(j, i) == v.conj()))
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// `H = A + V` restricted to a ball with Dirichlet truncation.
#[derive(Clone, Debug)]
pub struct TruncatedOperator<G: Group> {
    pub ball: BallIndex<G>,
    pub hopping: SparseHermitian,
    pub potential: Vec<f64>,
}

impl<G: Group> TruncatedOperator<G> {
    pub fn dim(&self) -> usize {
        self.hopping.dim
    }

    /// Replaces the diagonal potential, keeping the hopping part.
    pub fn with_potential(&self, potential: Vec<f64>) -> Result<Self> {
        if potential.len() != self.dim() {
            return Err(Error::Unsupported(format!(
                "potential length {} does not match ball size {}",
                potential.len(),
                self.dim()
            )));
        }
        Ok(TruncatedOperator { ball: self.ball.clone(), hopping: self.hopping.clone(), potential })
    }

    /// `out = H φ`. Each row accumulates the potential term first, then the
    /// hopping terms in row order.
    pub fn apply(&self, phi: &[Complex64], out: &mut [Complex64]) {
        for (i, row) in self.hopping.rows.iter().enumerate() {
            let mut acc = phi[i] * self.potential[i];
            for &(j, w) in row {
                acc += w * phi[j];
            }
            out[i] = acc;
        }
    }

    /// `⟨δ_site, Hⁿ δ_site⟩` for `n = 0..=order`, exact for the truncated
    /// matrix up to float rounding.
    pub fn diagonal_moments(&self, site: usize, order: usize) -> Vec<f64> {
        let mut phi = vec![Complex64::new(0.0, 0.0); self.dim()];
        let mut next = phi.clone();
        phi[site] = Complex64::new(1.0, 0.0);
        let mut out = Vec::with_capacity(order + 1);
        out.push(1.0);
        for _ in 0..order {
            self.apply(&phi, &mut next);
            std::mem::swap(&mut phi, &mut next);
            out.push(phi[site].re);
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut h = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for (i, row) in self.hopping.rows.iter().enumerate() {
            for &(j, w) in row {
                h[(i, j)] += w;
            }
            h[(i, i)] += Complex64::new(self.potential[i], 0.0);
        }
        h
    }
}

/// Assembles `A = L_m` on the ball: entry `(x, y)` is `m(s)` where `y = s⁻¹x`
/// and both ends lie in the ball.
pub fn assemble<G: Group>(
    m: &FiniteMeasure<G>,
    ball: &BallIndex<G>,
    potential: Vec<f64>,
) -> Result<TruncatedOperator<G>> {
    if !m.is_self_adjoint() {
        return Err(Error::NotSelfAdjoint);
    }
    if potential.len() != ball.len() {
        return Err(Error::Unsupported(format!(
            "potential length {} does not match ball size {}",
            potential.len(),
            ball.len()
        )));
    }
    let group = m.group();
    let atoms: Vec<(G::Element, Complex64)> =
        m.atoms().map(|(s, w)| Ok((group.inverse(s)?, w.to_complex()))).collect::<Result<_>>()?;
    let rows = ball
        .elements()
        .iter()
        .map(|x| {
            let mut row = Vec::with_capacity(atoms.len());
            for (s_inv, w) in &atoms {
                if let Some(j) = ball.index_of(&group.multiply(s_inv, x)?) {
                    row.push((j, *w));
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let hopping = SparseHermitian { dim: ball.len(), rows };
    Ok(TruncatedOperator { ball: ball.clone(), hopping, potential })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GroupElement, GroupSpec};
    use crate::measure::uniform_on_generators;
    use crate::schrodinger::{build_ball, DEFAULT_BALL_CAP};
    use crate::weight::Weight;

    fn z_line(radius: usize, potential: Vec<f64>) -> TruncatedOperator<GroupSpec> {
        let m = uniform_on_generators(GroupSpec::Z, Weight::one());
        let ball = build_ball(&m, radius, DEFAULT_BALL_CAP).unwrap();
        assemble(&m, &ball, potential).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn tridiagonal_line() {
        let op = z_line(1, vec![0.0; 3]);
        let h = op.to_dense();
        // ball order: 0, 1, -1
        let pos = |k: i64| op.ball.index_of(&GroupElement::Int(k)).unwrap();
        assert_eq!(h[(pos(0), pos(1))], c(1.0));
        assert_eq!(h[(pos(0), pos(-1))], c(1.0));
        assert_eq!(h[(pos(1), pos(-1))], c(0.0));
        assert_eq!(h[(pos(0), pos(0))], c(0.0));
        assert!(op.hopping.is_hermitian());
    }

    #[test]
    fn potential_on_diagonal() {
        let op = z_line(1, vec![0.5, -1.0, 2.0]);
        let h = op.to_dense();
        assert_eq!(h[(0, 0)], c(0.5));
        assert_eq!(h[(1, 1)], c(-1.0));
        assert_eq!(h[(2, 2)], c(2.0));
    }

    #[test]
    fn cyclic_three_is_circulant() {
        let g = GroupSpec::CyclicZmod { n: 3 };
        let m = uniform_on_generators(g, Weight::one());
        let ball = build_ball(&m, 5, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(ball.len(), 3);
        let h = assemble(&m, &ball, vec![0.0; 3]).unwrap().to_dense();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(h[(i, j)], c(if i == j { 0.0 } else { 1.0 }));
            }
        }
    }

    #[test]
    fn complex_hopping_is_hermitian() {
        let m = crate::FiniteMeasure::from_literals(GroupSpec::Z, [("1", "i"), ("-1", "-i")]).unwrap();
        let ball = build_ball(&m, 3, DEFAULT_BALL_CAP).unwrap();
        let op = assemble(&m, &ball, vec![0.0; ball.len()]).unwrap();
        assert!(op.hopping.is_hermitian());
        let h = op.to_dense();
        assert_eq!(h.adjoint(), h);
    }

    #[test]
    fn rejects_non_self_adjoint() {
        let m = crate::FiniteMeasure::from_literals(GroupSpec::Z, [("1", "2"), ("-1", "1")]).unwrap();
        let ball = build_ball(&m, 1, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(assemble(&m, &ball, vec![0.0; 3]).unwrap_err(), Error::NotSelfAdjoint);
    }

    #[test]
    fn free_walk_moments() {
        let op = z_line(4, vec![0.0; 9]);
        assert_eq!(op.diagonal_moments(0, 4), vec![1.0, 0.0, 2.0, 0.0, 6.0]);
    }
}
