//! Flat key = value configuration with bracketed section headers. Unknown
//! keys are rejected.
//!
//! ```text
//! [case]
//! name = square
//! resolution = 4
//!
//! [parameters]
//! mu_e = 20.0
//! beta_u = 25.0
//!
//! [run]
//! kind = convergence
//! k = 0
//! formulation = cg
//! levels = 5
//! ```

use crate::forms::{Formulation, ModelParameters};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunKind {
    Solve,
    Convergence,
    Adapt,
    Precond,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Direct,
    Pminres,
}

#[derive(Debug, Clone)]
pub struct CaseConfig {
    pub case: String,
    pub resolution: usize,
    pub kind: RunKind,
    pub k: usize,
    pub formulation: Formulation,
    pub levels: usize,
    pub max_steps: usize,
    pub zeta: f64,
    pub solver: SolverKind,
    pub rtol: f64,
    pub maxit: usize,
    pub smoothing: bool,
    pub scaling: bool,
    pub output_dir: Option<String>,
    pub vtk: bool,
    pub dump_matrix: bool,
    pub ells: Vec<usize>,
    pub betas: Vec<f64>,
    pub kappas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub audit: Option<([f64; 2], f64)>,
    raw_params: Vec<(String, f64)>,
}

impl Default for CaseConfig {
    fn default() -> Self {
        CaseConfig {
            case: "square".into(),
            resolution: 4,
            kind: RunKind::Solve,
            k: 0,
            formulation: Formulation::CgPressure,
            levels: 4,
            max_steps: 8,
            zeta: 0.5,
            solver: SolverKind::Direct,
            rtol: 1e-6,
            maxit: 500,
            smoothing: true,
            scaling: true,
            output_dir: None,
            vtk: false,
            dump_matrix: false,
            ells: vec![2, 4, 8],
            betas: vec![10.0],
            kappas: vec![],
            lambdas: vec![],
            audit: None,
            raw_params: Vec::new(),
        }
    }
}

impl CaseConfig {
    pub fn formulation_name(&self) -> &'static str {
        match self.formulation {
            Formulation::CgPressure => "cg",
            Formulation::DgPressure => "dg",
        }
    }

    /// Model parameters: defaults for the named case, overridden by the
    /// `[parameters]` section; penalties default to 2.5e(2k+1).
    pub fn parameters(&self) -> ModelParameters {
        let mut p = ModelParameters::example1(self.k);
        for (key, value) in &self.raw_params {
            match key.as_str() {
                "mu_e" => p.mu_e = *value,
                "mu_p" => p.mu_p = *value,
                "lambda_e" => p.lambda_e = *value,
                "lambda_p" => p.lambda_p = *value,
                "alpha" => p.alpha = *value,
                "c0" => p.c0 = *value,
                "kappa" => p.kappa = *value,
                "eta" => p.eta = *value,
                "dt" => p.dt = *value,
                "beta_u" => p.beta_u = *value,
                "beta_p" => p.beta_p = *value,
                "gravity_x" => p.gravity[0] = *value,
                "gravity_y" => p.gravity[1] = *value,
                _ => unreachable!("validated during parsing"),
            }
        }
        p
    }

    pub fn set_parameter(&mut self, key: &str, value: f64) {
        self.raw_params.retain(|(k, _)| k != key);
        self.raw_params.push((key.to_string(), value));
    }

    pub fn parse(text: &str) -> Result<CaseConfig> {
        let mut config = CaseConfig::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].trim().to_string();
                if !["case", "parameters", "run"].contains(&section.as_str()) {
                    return Err(Error::Config(format!("line {}: unknown section [{section}]", lineno + 1)));
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!("line {}: expected key = value", lineno + 1)));
            };
            let key = key.trim();
            let value = value.trim();
            let bad_key = || Error::Config(format!("line {}: unknown key '{key}' in [{section}]", lineno + 1));
            let parse_f64 = |v: &str| -> Result<f64> {
                v.parse().map_err(|_| Error::Config(format!("line {}: bad number '{v}'", lineno + 1)))
            };
            let parse_usize = |v: &str| -> Result<usize> {
                v.parse().map_err(|_| Error::Config(format!("line {}: bad integer '{v}'", lineno + 1)))
            };
            let parse_bool = |v: &str| -> Result<bool> {
                match v {
                    "true" | "1" | "yes" => Ok(true),
                    "false" | "0" | "no" => Ok(false),
                    _ => Err(Error::Config(format!("line {}: bad boolean '{v}'", lineno + 1))),
                }
            };
            match section.as_str() {
                "case" => match key {
                    "name" => config.case = value.to_string(),
                    "resolution" => config.resolution = parse_usize(value)?,
                    _ => return Err(bad_key()),
                },
                "parameters" => {
                    const KEYS: [&str; 13] = [
                        "mu_e", "mu_p", "lambda_e", "lambda_p", "alpha", "c0", "kappa", "eta", "dt",
                        "beta_u", "beta_p", "gravity_x", "gravity_y",
                    ];
                    if !KEYS.contains(&key) {
                        return Err(bad_key());
                    }
                    config.raw_params.push((key.to_string(), parse_f64(value)?));
                }
                "run" => match key {
                    "kind" => {
                        config.kind = match value {
                            "solve" => RunKind::Solve,
                            "convergence" => RunKind::Convergence,
                            "adapt" => RunKind::Adapt,
                            "precond" => RunKind::Precond,
                            _ => return Err(Error::Config(format!("line {}: unknown kind '{value}'", lineno + 1))),
                        }
                    }
                    "k" => config.k = parse_usize(value)?,
                    "formulation" => {
                        config.formulation = match value {
                            "cg" => Formulation::CgPressure,
                            "dg" => Formulation::DgPressure,
                            _ => return Err(Error::Config(format!("line {}: unknown formulation '{value}'", lineno + 1))),
                        }
                    }
                    "levels" => config.levels = parse_usize(value)?,
                    "max_steps" => config.max_steps = parse_usize(value)?,
                    "zeta" => config.zeta = parse_f64(value)?,
                    "solver" => {
                        config.solver = match value {
                            "direct" => SolverKind::Direct,
                            "pminres" => SolverKind::Pminres,
                            _ => return Err(Error::Config(format!("line {}: unknown solver '{value}'", lineno + 1))),
                        }
                    }
                    "rtol" => config.rtol = parse_f64(value)?,
                    "maxit" => config.maxit = parse_usize(value)?,
                    "smoothing" => config.smoothing = parse_bool(value)?,
                    "scaling" => config.scaling = parse_bool(value)?,
                    "output_dir" => config.output_dir = Some(value.to_string()),
                    "vtk" => config.vtk = parse_bool(value)?,
                    "dump_matrix" => config.dump_matrix = parse_bool(value)?,
                    "ells" => config.ells = parse_list(value, parse_usize)?,
                    "betas" => config.betas = parse_list(value, parse_f64)?,
                    "kappas" => config.kappas = parse_list(value, parse_f64)?,
                    "lambdas" => config.lambdas = parse_list(value, parse_f64)?,
                    "audit_x" | "audit_y" | "audit_radius" => {
                        let v = parse_f64(value)?;
                        let (mut pt, mut rad) = config.audit.unwrap_or(([0.0, 0.0], 0.0));
                        match key {
                            "audit_x" => pt[0] = v,
                            "audit_y" => pt[1] = v,
                            _ => rad = v,
                        }
                        config.audit = Some((pt, rad));
                    }
                    _ => return Err(bad_key()),
                },
                _ => return Err(Error::Config(format!("line {}: key outside of any section", lineno + 1))),
            }
        }
        if config.k > 2 {
            return Err(Error::Config(format!("k must be 0, 1, or 2, got {}", config.k)));
        }
        if config.kind == RunKind::Convergence && config.levels < 2 {
            return Err(Error::Config("convergence runs need levels >= 2".into()));
        }
        Ok(config)
    }

    pub fn load(path: &str) -> Result<CaseConfig> {
        CaseConfig::parse(&std::fs::read_to_string(path)?)
    }
}

fn parse_list<T>(value: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value.split(',').map(|v| item(v.trim())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "\n[case]\nname = lshape\nresolution = 8\n\n[parameters]\nmu_e = 3.0 # comment\n\n[run]\nkind = adapt\nk = 1\nzeta = 1e-7\nmax_steps = 7\n";
        let c = CaseConfig::parse(text).unwrap();
        assert_eq!(c.case, "lshape");
        assert_eq!(c.resolution, 8);
        assert_eq!(c.kind, RunKind::Adapt);
        assert_eq!(c.k, 1);
        assert_eq!(c.zeta, 1e-7);
        assert_eq!(c.parameters().mu_e, 3.0);
    }

    #[test]
    fn unknown_keys_fail_fast() {
        assert!(CaseConfig::parse("[run]\nbogus = 1\n").is_err());
        assert!(CaseConfig::parse("[parameters]\nmu_q = 1\n").is_err());
        assert!(CaseConfig::parse("[nope]\n").is_err());
    }

    #[test]
    fn penalty_defaults_follow_order() {
        let c = CaseConfig::parse("[run]\nk = 1\n").unwrap();
        assert_eq!(c.parameters().beta_u, 2500.0);
        let c = CaseConfig::parse("[run]\nk = 1\n[parameters]\nbeta_u = 500\n").unwrap();
        assert_eq!(c.parameters().beta_u, 500.0);
    }
}
