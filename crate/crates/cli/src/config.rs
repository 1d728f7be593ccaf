//! Experiment configuration, read from TOML.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use wreath_core::{FiniteMeasure, GroupSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub element: String,
    pub weight: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub base_group: GroupSpec,
    pub lamp_group: GroupSpec,
    pub measure_gamma: Vec<Atom>,
    pub measure_lambda: Vec<Atom>,
    #[serde(default)]
    pub params: Params,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub order: usize,
    pub radius: usize,
    pub realizations: usize,
    pub seed: u64,
    /// Spectral parameters `[re, im]`.
    pub z: Vec<[f64; 2]>,
    /// Energy grid; defaults to 21 points over `[−S, S]` with `S` the total
    /// mass of both measures.
    pub energies: Option<Vec<f64>>,
    pub eta: f64,
    pub epsilons: Vec<f64>,
    pub times: Vec<f64>,
    /// `(L, K)` partial-sum cutoffs, nested.
    pub cutoffs: Vec<(usize, i64)>,
    pub wreath_radius: usize,
    /// Base element for off-diagonal Green function entries.
    pub target: String,
    pub pittet_n: usize,
    pub instances: usize,
    pub max_dim: usize,
    pub sampler_draws: usize,
    pub sampler_order: usize,
    pub oracle: bool,
    pub eigen: bool,
    pub state_cap: usize,
    pub ball_cap: usize,
    pub basis_cap: usize,
    pub dense_cap: usize,
    pub enumeration_guard: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            order: 8,
            radius: 10,
            realizations: 200,
            seed: 0,
            z: vec![[0.1, 0.5]],
            energies: None,
            eta: 0.05,
            epsilons: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            times: vec![1.0, 2.0, 5.0, 10.0, 20.0],
            cutoffs: vec![(0, 0), (1, 1), (1, 2), (2, 2), (3, 3)],
            wreath_radius: 10,
            target: "e".into(),
            pittet_n: 20,
            instances: 100,
            max_dim: 50,
            sampler_draws: 1_000_000,
            sampler_order: 6,
            oracle: true,
            eigen: false,
            state_cap: wreath_core::walk::DEFAULT_STATE_CAP,
            ball_cap: wreath_core::schrodinger::DEFAULT_BALL_CAP,
            basis_cap: wreath_core::finite::DEFAULT_BASIS_CAP,
            dense_cap: wreath_core::schrodinger::DEFAULT_DENSE_CAP,
            enumeration_guard: wreath_core::walk::DEFAULT_ENUMERATION_GUARD,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).context("invalid configuration")?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.base_group.validate().context("base_group")?;
        self.lamp_group.validate().context("lamp_group")?;
        let p = &self.params;
        for (name, value) in [
            ("state_cap", p.state_cap),
            ("ball_cap", p.ball_cap),
            ("basis_cap", p.basis_cap),
            ("dense_cap", p.dense_cap),
            ("enumeration_guard", p.enumeration_guard),
        ] {
            if value == 0 {
                bail!("params.{name} must be positive");
            }
        }
        if p.eta <= 0.0 {
            bail!("params.eta must be positive");
        }
        if p.z.iter().any(|z| z[1] == 0.0) {
            bail!("params.z entries need a nonzero imaginary part");
        }
        self.gamma().context("measure_gamma")?;
        self.lambda().context("measure_lambda")?;
        Ok(())
    }

    fn measure(group: &GroupSpec, atoms: &[Atom]) -> Result<FiniteMeasure<GroupSpec>> {
        Ok(FiniteMeasure::from_literals(group.clone(), atoms.iter().map(|a| (a.element.as_str(), a.weight.as_str())))?)
    }

    pub fn gamma(&self) -> Result<FiniteMeasure<GroupSpec>> {
        Self::measure(&self.base_group, &self.measure_gamma)
    }

    pub fn lambda(&self) -> Result<FiniteMeasure<GroupSpec>> {
        Self::measure(&self.lamp_group, &self.measure_lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAMPLIGHTER: &str = r#"
base_group = { kind = "Z" }
lamp_group = { kind = "CyclicZmod", n = 2 }
measure_gamma = [{ element = "1", weight = "1" }, { element = "-1", weight = "1" }]
measure_lambda = [{ element = "1", weight = "1" }]

[params]
order = 4
"#;

    #[test]
    fn parses_lamplighter() {
        let c = ExperimentConfig::parse(LAMPLIGHTER).unwrap();
        assert_eq!(c.lamp_group, GroupSpec::CyclicZmod { n: 2 });
        assert_eq!(c.params.order, 4);
        assert_eq!(c.params.radius, Params::default().radius);
        assert_eq!(c.gamma().unwrap().len(), 2);
    }

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::parse(LAMPLIGHTER).unwrap();
        c.params.energies = Some(vec![-1.5, 0.0, 0.25]);
        c.params.z.push([-0.3, 1e-3]);
        let text = c.to_toml().unwrap();
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), c);
    }

    #[test]
    fn empty_config_is_rejected() {
        let err = ExperimentConfig::parse("").unwrap_err();
        assert!(format!("{err:#}").contains("missing field"));
    }

    #[test]
    fn diagnostics_name_the_field() {
        let bad = LAMPLIGHTER.replace("order = 4", "order = \"four\"");
        let err = format!("{:#}", ExperimentConfig::parse(&bad).unwrap_err());
        assert!(err.contains("order") && err.contains("line"), "{err}");
        let bad = LAMPLIGHTER.replace("n = 2", "n = 1");
        assert!(ExperimentConfig::parse(&bad).is_err());
        let bad = LAMPLIGHTER.replace("order = 4", "ball_cap = 0");
        assert!(format!("{:#}", ExperimentConfig::parse(&bad).unwrap_err()).contains("ball_cap"));
    }

    #[test]
    fn bad_element_literal() {
        let bad = LAMPLIGHTER.replace("element = \"-1\"", "element = \"(1,2)\"");
        assert!(format!("{:#}", ExperimentConfig::parse(&bad).unwrap_err()).contains("measure_gamma"));
    }
}
