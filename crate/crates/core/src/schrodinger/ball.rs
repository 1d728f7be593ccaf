use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::group::Group;
use crate::measure::FiniteMeasure;

pub const DEFAULT_BALL_CAP: usize = 1_000_000;

/// Elements within BFS distance `radius` of the identity, in BFS order
/// (neighbours `s·x` visited in atom order). Index 0 is the identity.
#[derive(Clone, Debug)]
pub struct BallIndex<G: Group> {
    pub radius: usize,
    elements: Vec<G::Element>,
    distance: Vec<usize>,
    lookup: HashMap<G::Element, usize>,
}

impl<G: Group> BallIndex<G> {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &G::Element {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[G::Element] {
        &self.elements
    }

    pub fn index_of(&self, x: &G::Element) -> Option<usize> {
        self.lookup.get(x).copied()
    }

    pub fn distance(&self, i: usize) -> usize {
        self.distance[i]
    }
}

/// Breadth-first ball in the Cayley graph generated by the non-identity atoms
/// of `m`.
pub fn build_ball<G: Group>(m: &FiniteMeasure<G>, radius: usize, cap: usize) -> Result<BallIndex<G>> {
    let group = m.group();
    let gens = m.generators();
    let e = group.identity();
    let mut ball = BallIndex { radius, elements: vec![e.clone()], distance: vec![0], lookup: HashMap::from([(e, 0)]) };
    let mut head = 0;
    while head < ball.elements.len() {
        let d = ball.distance[head];
        if d < radius {
            for s in &gens {
                let y = group.multiply(s, &ball.elements[head])?;
                if !ball.lookup.contains_key(&y) {
                    if ball.elements.len() == cap {
                        return Err(Error::CapExceeded { what: "ball size", limit: cap });
                    }
                    ball.lookup.insert(y.clone(), ball.elements.len());
                    ball.elements.push(y);
                    ball.distance.push(d + 1);
                }
            }
        }
        head += 1;
    }
    Ok(ball)
}
