use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::models::{InitialCondition, ModelKind, ModelRun};
use crate::transport::PoissonBc;

/// A per-sample output stored in archives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    /// The full distribution, `nx * nv^dv` values.
    F,
    /// Density at the x-nodes.
    Rho,
    /// Temperature at the x-nodes.
    Temperature,
    /// `log10 ||E||_{L2}`, one value.
    Zeta,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [Quantity::F, Quantity::Rho, Quantity::Temperature, Quantity::Zeta];

    pub fn name(&self) -> &'static str {
        match self {
            Quantity::F => "f",
            Quantity::Rho => "rho",
            Quantity::Temperature => "temperature",
            Quantity::Zeta => "zeta",
        }
    }

    /// Quantities recorded when the config does not list any.
    pub fn defaults(model: ModelKind) -> Vec<Quantity> {
        if model.is_homogeneous() {
            vec![Quantity::F, Quantity::Rho, Quantity::Temperature]
        } else {
            vec![Quantity::Rho, Quantity::Temperature, Quantity::Zeta]
        }
    }

    pub fn supported_by(&self, model: ModelKind) -> bool {
        match self {
            Quantity::F => model.is_kinetic(),
            Quantity::Zeta => !model.is_homogeneous(),
            _ => true,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown quantity `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    #[serde(default)]
    quantities: Vec<Quantity>,
}

/// A fully resolved run: solver settings plus what each sample records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub run: ModelRun,
    pub quantities: Vec<Quantity>,
}

fn uniform_times(t_final: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| t_final * i as f64 / n as f64).collect()
}

/// Desk-scale defaults for an initial condition.
pub fn preset(model: ModelKind, ic_id: &str) -> Result<ModelRun> {
    let ic = InitialCondition::by_name(ic_id)?;
    let z = ic.z_bounds().iter().map(|b| 0.5 * (b[0] + b[1])).collect();
    let mut run = ModelRun::new(model, ic.clone(), z, 1.0);
    match ic {
        InitialCondition::TwoBubble { .. } | InitialCondition::Custom { .. } => {
            run.t_final = 2.0;
            run.dt = Some(0.05);
            run.output_times = uniform_times(2.0, 8);
        }
        InitialCondition::LinearLd { k, .. } | InitialCondition::NonlinearLd { k, .. } => {
            let t_final = if ic_id == "linear_ld" { 10.0 } else { 36.0 };
            run.t_final = t_final;
            run.grid.nx = 65;
            run.grid.x_bounds = [0.0, 2.0 * std::f64::consts::PI / k];
            run.poisson = PoissonBc::Dirichlet { lo: 0.0, hi: 0.0 };
            run.output_times = uniform_times(t_final, (2.0 * t_final) as usize);
        }
        InitialCondition::TwoStream { k, .. } => {
            run.t_final = 20.0;
            run.grid.nx = 65;
            run.grid.x_bounds = [0.0, 2.0 * std::f64::consts::PI / k];
            run.poisson = PoissonBc::Dirichlet { lo: 0.0, hi: 0.0 };
            run.output_times = uniform_times(20.0, 40);
        }
    }
    Ok(run)
}

/// Sections merged key by key onto the preset; every other key replaces.
const MERGED: [&str; 3] = ["grid", "ic", "kernel"];

fn config_error(key: impl Into<String>, reason: impl fmt::Display) -> Error {
    Error::Config {
        key: key.into(),
        reason: reason.to_string(),
    }
}

/// Parses a TOML config and lays it over the preset for `(model, ic_id)`.
///
/// Keys mirror [`ModelRun`] except `model`, which only the caller sets, plus
/// an `[output]` section listing the recorded quantities.
pub fn load_config(model: ModelKind, ic_id: &str, text: Option<&str>) -> Result<RunConfig> {
    let base = preset(model, ic_id)?;
    let mut user: Table = match text {
        Some(t) => t.parse().map_err(|e: toml::de::Error| config_error("<file>", e.message()))?,
        None => Table::new(),
    };
    if user.contains_key("model") {
        return Err(config_error("model", "the model is chosen on the command line"));
    }
    let output: OutputSection = match user.remove("output") {
        Some(v) => deserialize_at(v, "output")?,
        None => OutputSection::default(),
    };
    if let Some(Value::Table(ic)) = user.get("ic") {
        if let Some(id) = ic.get("id") {
            if id.as_str() != Some(ic_id) {
                return Err(config_error("ic.id", format!("{id} conflicts with --ic {ic_id}")));
            }
        }
    }
    let mut merged = match Value::try_from(&base).map_err(|e| config_error("<preset>", e))? {
        Value::Table(t) => t,
        _ => unreachable!("a run serialises to a table"),
    };
    for (key, value) in user {
        match (merged.get_mut(&key), value) {
            (Some(Value::Table(dst)), Value::Table(src)) if MERGED.contains(&key.as_str()) => {
                dst.extend(src);
            }
            (_, value) => {
                merged.insert(key, value);
            }
        }
    }
    let run: ModelRun = deserialize_at(Value::Table(merged), "")?;
    run.validate()?;
    let quantities = if output.quantities.is_empty() {
        Quantity::defaults(model)
    } else {
        output.quantities
    };
    for (i, q) in quantities.iter().enumerate() {
        if quantities[..i].contains(q) {
            return Err(config_error("output.quantities", format!("`{q}` listed twice")));
        }
        if !q.supported_by(model) {
            return Err(config_error("output.quantities", format!("{model} has no `{q}` output")));
        }
    }
    Ok(RunConfig { run, quantities })
}

fn deserialize_at<T: for<'de> Deserialize<'de>>(value: Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let key = match (prefix, inner.as_str()) {
            (p, ".") => p.to_string(),
            ("", i) => i.to_string(),
            (p, i) => format!("{p}.{i}"),
        };
        let reason = e.into_inner().to_string();
        config_error(key, reason)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::BetaPolicy;

    fn key_of(e: Error) -> String {
        match e {
            Error::Config { key, .. } => key,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn presets_validate() {
        for id in ["two_bubble", "anisotropic_pair"] {
            for m in [ModelKind::HomLandau, ModelKind::HomFp] {
                preset(m, id).unwrap().validate().unwrap();
            }
        }
        for id in ["linear_ld", "nonlinear_ld", "two_stream"] {
            for m in [ModelKind::Vpl, ModelKind::Vpfp, ModelKind::Ep] {
                preset(m, id).unwrap().validate().unwrap();
            }
        }
        assert!(matches!(preset(ModelKind::Vpl, "bump"), Err(Error::UnknownInitialCondition(_))));
    }

    #[test]
    fn user_values_override_the_preset() {
        let text = r#"
            epsilon = 1e-4
            output_times = [0.0, 1.0]
            beta = { kind = "fixed", value = 40.0 }
            [grid]
            nv = 16
            [ic]
            alpha = 0.02
            [output]
            quantities = ["zeta", "rho"]
        "#;
        let cfg = load_config(ModelKind::Vpfp, "linear_ld", Some(text)).unwrap();
        assert_eq!(cfg.run.epsilon, 1e-4);
        assert_eq!(cfg.run.grid.nv, 16);
        assert_eq!(cfg.run.grid.nx, 65);
        assert_eq!(cfg.run.beta, BetaPolicy::Fixed(40.0));
        assert_eq!(cfg.run.ic, InitialCondition::LinearLd { alpha: 0.02, k: 0.5 });
        assert_eq!(cfg.quantities, vec![Quantity::Zeta, Quantity::Rho]);
        let plain = load_config(ModelKind::Vpfp, "linear_ld", None).unwrap();
        assert_eq!(plain.run, preset(ModelKind::Vpfp, "linear_ld").unwrap());
        assert_eq!(plain.quantities, Quantity::defaults(ModelKind::Vpfp));
    }

    #[test]
    fn unknown_keys_report_their_path() {
        let cases = [
            ("epsilom = 1.0", "epsilom"),
            ("[grid]\nnvv = 3", "grid.nvv"),
            ("[kernel]\ngama = 1.0", "kernel.gama"),
            ("[output]\nquantity = []", "output.quantity"),
            ("model = \"vpl\"", "model"),
            ("[ic]\nid = \"two_stream\"", "ic.id"),
            ("[grid]\nnx = \"many\"", "grid.nx"),
        ];
        for (text, key) in cases {
            let err = load_config(ModelKind::Vpfp, "linear_ld", Some(text)).unwrap_err();
            assert_eq!(key_of(err), key, "{text}");
        }
    }

    #[test]
    fn semantic_and_output_errors() {
        let bad = load_config(ModelKind::Vpfp, "linear_ld", Some("t_final = -1.0"));
        assert!(matches!(bad, Err(Error::InvalidParameter(_))));
        let f_for_ep = load_config(ModelKind::Ep, "linear_ld", Some("[output]\nquantities = [\"f\"]"));
        assert_eq!(key_of(f_for_ep.unwrap_err()), "output.quantities");
        let twice = load_config(ModelKind::Vpl, "linear_ld", Some("[output]\nquantities = [\"rho\", \"rho\"]"));
        assert_eq!(key_of(twice.unwrap_err()), "output.quantities");
        let unknown = load_config(ModelKind::Vpl, "linear_ld", Some("[output]\nquantities = [\"phi\"]"));
        assert!(key_of(unknown.unwrap_err()).starts_with("output.quantities"));
        let syntax = load_config(ModelKind::Vpl, "linear_ld", Some("epsilon = "));
        assert!(matches!(syntax, Err(Error::Config { .. })));
    }

    #[test]
    fn quantity_names_round_trip() {
        for q in Quantity::ALL {
            assert_eq!(q.name().parse::<Quantity>().unwrap(), q);
        }
        assert!("E".parse::<Quantity>().is_err());
    }
}
