use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::bounds::TheoremConstants;
use crate::geometry::{DensitySpec, Point};
use crate::graphs::{gamma_parallel_example, DetGraph};
use crate::relay::ChainMode;
use crate::weights::DEFAULT_M;
use crate::ceil_snapped;

/// Default length of a builtin star's rays.
pub const DEFAULT_STAR_LENGTH: f64 = 0.3;

/// Default hop-budget multiplier: `L_n = 16 ceil(l_up / r_n)`.
pub const DEFAULT_LN_MULT: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RadiusRule {
    Explicit(f64),
    /// `r_n = n^-beta`.
    Beta(f64),
    /// `r_n = scale sqrt(log n / n)`.
    LogScale(f64),
}

impl RadiusRule {
    pub fn radius(&self, n: usize) -> f64 {
        let nf = n as f64;
        match *self {
            RadiusRule::Explicit(r) => r,
            RadiusRule::Beta(b) => nf.powf(-b),
            RadiusRule::LogScale(s) => s * (nf.ln() / nf).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GammaSource {
    File(PathBuf),
    Segment { d: f64 },
    Star { k: usize, len: f64 },
    Parallel { m: usize },
}

impl GammaSource {
    pub fn load(&self) -> Result<DetGraph, HarnessError> {
        Ok(match self {
            GammaSource::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| HarnessError::Config(format!("cannot read backbone file {}: {e}", path.display())))?;
                DetGraph::parse(&text)?
            }
            GammaSource::Segment { d } => DetGraph::segment(*d)?,
            GammaSource::Star { k, len } => DetGraph::star(*k, *len)?,
            GammaSource::Parallel { m } => gamma_parallel_example(*m)?,
        })
    }

    /// `segment 0.3`, `star 5 0.3`, `parallel 20`.
    pub fn parse_builtin(text: &str) -> Result<Self, HarnessError> {
        let parts: Vec<&str> = text.split_whitespace().collect();
        let bad = || HarnessError::Config(format!("unknown builtin backbone `{text}`"));
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["segment", d] => Ok(GammaSource::Segment { d: num(d)? }),
            ["star", k] => Ok(GammaSource::Star { k: int(k)?, len: DEFAULT_STAR_LENGTH }),
            ["star", k, len] => Ok(GammaSource::Star { k: int(k)?, len: num(len)? }),
            ["parallel", m] => Ok(GammaSource::Parallel { m: int(m)? }),
            _ => Err(bad()),
        }
    }

    pub fn builtin_text(&self) -> Option<String> {
        match self {
            GammaSource::File(_) => None,
            GammaSource::Segment { d } => Some(format!("segment {d}")),
            GammaSource::Star { k, len } => Some(format!("star {k} {len}")),
            GammaSource::Parallel { m } => Some(format!("parallel {m}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeKind {
    TwoPoint,
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LnRule {
    Explicit(u64),
    /// `L_n = ceil(mult * ceil(l_up / r_n))`.
    Multiplier(f64),
}

impl LnRule {
    pub fn resolve(&self, l_up: f64, r_n: f64) -> u64 {
        match *self {
            LnRule::Explicit(l) => l,
            LnRule::Multiplier(m) => ceil_snapped(m * ceil_snapped(l_up / r_n) as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub radius: RadiusRule,
    pub gamma: GammaSource,
    pub mode: ModeKind,
    /// Ratio-mode slack, also the `eps` of the distance event `E_uv`.
    pub eps: f64,
    pub l_n: LnRule,
    pub m: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub out: Option<PathBuf>,
    pub density_file: Option<PathBuf>,
    /// Exponent in `e0 ~ n^alpha`; only used for regime warnings.
    pub alpha: Option<f64>,
    pub constants: TheoremConstants,
    /// Separation used by `bounds` when no backbone is given.
    pub d: Option<f64>,
    /// Sample sizes for the trend experiment.
    pub trend_n: Vec<usize>,
    /// Worker cap; never affects output.
    pub threads: Option<usize>,
    /// Replaces sampling in every trial.
    #[serde(skip)]
    pub fixed_points: Option<Vec<Point>>,
}

impl ExperimentConfig {
    pub fn new(n: usize, radius: RadiusRule, gamma: GammaSource) -> Self {
        Self {
            n,
            radius,
            gamma,
            mode: ModeKind::TwoPoint,
            eps: 0.5,
            l_n: LnRule::Multiplier(DEFAULT_LN_MULT),
            m: DEFAULT_M,
            trials: 100,
            master_seed: 1,
            out: None,
            density_file: None,
            alpha: None,
            constants: TheoremConstants::default(),
            d: None,
            trend_n: Vec::new(),
            threads: None,
            fixed_points: None,
        }
    }

    pub fn r_n(&self) -> f64 {
        self.radius.radius(self.n)
    }

    pub fn chain_mode(&self) -> ChainMode {
        match self.mode {
            ModeKind::TwoPoint => ChainMode::TwoPoint,
            ModeKind::Ratio => ChainMode::Ratio { eps: self.eps },
        }
    }

    pub fn density(&self) -> Result<DensitySpec, HarnessError> {
        match &self.density_file {
            None => Ok(DensitySpec::Uniform),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| HarnessError::Config(format!("cannot read density file {}: {e}", path.display())))?;
                Ok(DensitySpec::parse(&text)?)
            }
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.n == 0 && self.fixed_points.is_none() {
            return bad("n must be positive".into());
        }
        let r = self.r_n();
        if !(r > 0.0 && r.is_finite()) {
            return bad(format!("r_n must be positive, got {r}"));
        }
        if !(self.eps > 0.0) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.m > 2.0) {
            return bad(format!("M must exceed 2, got {}", self.m));
        }
        if let LnRule::Multiplier(m) = self.l_n {
            if !(m > 0.0) {
                return bad(format!("L_n multiplier must be positive, got {m}"));
            }
        }
        if self.threads == Some(0) {
            return bad("thread count must be positive".into());
        }
        Ok(())
    }

    /// Asymptotic-regime diagnostics; they never stop a run.
    pub fn regime_warnings(&self, gamma: &DetGraph) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.n as f64;
        let r = self.r_n();
        let e0 = gamma.e0() as f64;
        if e0 >= 0.1 * n * r * r {
            out.push(format!("e0 = {e0} is not much smaller than n r_n^2 = {:.3}", n * r * r));
        }
        if let Some(alpha) = self.alpha {
            if e0 > n.powf(alpha) {
                out.push(format!("e0 = {e0} exceeds n^alpha = {:.3}", n.powf(alpha)));
            }
            if self.mode == ModeKind::TwoPoint && n > 1.0 {
                let beta = match self.radius {
                    RadiusRule::Beta(b) => b,
                    _ => -r.ln() / n.ln(),
                };
                if beta >= (1.0 - alpha) / 4.0 {
                    out.push(format!(
                        "two-point mode needs beta < (1 - alpha) / 4 = {:.4}, got beta = {beta:.4}",
                        (1.0 - alpha) / 4.0
                    ));
                }
            }
        }
        out
    }

    /// Warns when the square-chain strip ratio `r_n^2 L_n / l0` is not small.
    pub fn strip_warning(&self, gamma: &DetGraph) -> Option<String> {
        let r = self.r_n();
        let l_n = self.l_n.resolve(gamma.l_up(), r) as f64;
        let strip = r * r * l_n / gamma.l0();
        (strip > 0.1).then(|| format!("r_n^2 L_n / l0 = {strip:.4} is not small"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_rules() {
        assert_eq!(RadiusRule::Explicit(0.1).radius(10), 0.1);
        assert!((RadiusRule::Beta(0.5).radius(10_000) - 0.01).abs() < 1e-15);
        let r = RadiusRule::LogScale(20f64.sqrt()).radius(2000);
        assert!((r - (20.0 * 2000f64.ln() / 2000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ln_rule() {
        assert_eq!(LnRule::Multiplier(16.0).resolve(0.32, 0.08), 64);
        assert_eq!(LnRule::Multiplier(16.0).resolve(0.3, 0.1), 48);
        assert_eq!(LnRule::Explicit(7).resolve(0.3, 0.1), 7);
    }

    #[test]
    fn builtin_text_round_trip() {
        for s in ["segment 0.3", "star 5 0.3", "parallel 20"] {
            let g = GammaSource::parse_builtin(s).unwrap();
            assert_eq!(g.builtin_text().unwrap(), s);
        }
        assert_eq!(GammaSource::parse_builtin("star 4").unwrap(), GammaSource::Star { k: 4, len: 0.3 });
        assert!(GammaSource::parse_builtin("circle 3").is_err());
    }

    #[test]
    fn beta_warning_threshold() {
        let gamma = DetGraph::segment(0.3).unwrap();
        let mut c = ExperimentConfig::new(10_000, RadiusRule::Beta(0.3), GammaSource::Segment { d: 0.3 });
        c.alpha = Some(0.2);
        assert!(c.regime_warnings(&gamma).iter().any(|w| w.contains("beta")));
        c.radius = RadiusRule::Beta(0.19);
        assert!(!c.regime_warnings(&gamma).iter().any(|w| w.contains("beta")));
        c.mode = ModeKind::Ratio;
        c.radius = RadiusRule::Beta(0.3);
        assert!(!c.regime_warnings(&gamma).iter().any(|w| w.contains("beta")));
    }
}
