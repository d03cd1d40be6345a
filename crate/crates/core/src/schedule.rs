//! Step-size sequences and symbolic checks of their summability.
//!
//! Summability is decided per family, never from numerical partial sums.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A step-size sequence `γ_n`, indexed from `n = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum StepSchedule {
    Constant(f64),
    /// `γ_n = c / n^p`
    Power { c: f64, p: f64 },
    Custom(Vec<f64>),
}

/// Facts about a schedule that can be read off its family.
/// `None` means unknown.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleProperties {
    pub sum_diverges: Option<bool>,
    pub sum_squares_converges: Option<bool>,
    pub bounded_above_by: Option<f64>,
    pub bounded_below_by: Option<f64>,
}

/// Hypotheses a schedule can be certified against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Requirement {
    /// `Σγ_n = ∞` and `Σγ_n² < ∞`.
    RobbinsMonro,
    /// `0 < inf γ_n ≤ sup γ_n < α/L`.
    OmdWindow { modulus: f64, lipschitz: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "reason")]
pub enum Certification {
    Pass,
    Fail(String),
    Uncertifiable(String),
}

impl Certification {
    pub fn passed(&self) -> bool {
        matches!(self, Certification::Pass)
    }
}

impl StepSchedule {
    pub fn constant(step: f64) -> Result<Self> {
        let s = StepSchedule::Constant(step);
        s.validate()?;
        Ok(s)
    }

    pub fn power(c: f64, p: f64) -> Result<Self> {
        let s = StepSchedule::Power { c, p };
        s.validate()?;
        Ok(s)
    }

    pub fn custom(steps: Vec<f64>) -> Result<Self> {
        let s = StepSchedule::Custom(steps);
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        match self {
            StepSchedule::Constant(g) if !(g.is_finite() && *g > 0.0) => {
                Err(Error::Config(format!("constant step must be positive, got {g}")))
            }
            StepSchedule::Power { c, p } if !(c.is_finite() && *c > 0.0 && *p > 0.0 && *p <= 1.0) => Err(
                Error::Config(format!("power schedule needs c > 0 and p in (0, 1], got c={c}, p={p}")),
            ),
            StepSchedule::Custom(v) if v.iter().any(|g| !(g.is_finite() && *g >= 0.0)) => {
                Err(Error::Config("custom steps must be finite and non-negative".into()))
            }
            _ => Ok(()),
        }
    }

    /// `γ_n` for `n ≥ 1`.
    pub fn step_at(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::Index { index: 0, len: 0 });
        }
        match self {
            StepSchedule::Constant(g) => Ok(*g),
            StepSchedule::Power { c, p } => Ok(c / (n as f64).powf(*p)),
            StepSchedule::Custom(v) => v
                .get(n - 1)
                .copied()
                .ok_or(Error::Index { index: n, len: v.len() }),
        }
    }

    pub fn properties(&self) -> ScheduleProperties {
        match self {
            StepSchedule::Constant(g) => ScheduleProperties {
                sum_diverges: Some(true),
                sum_squares_converges: Some(false),
                bounded_above_by: Some(*g),
                bounded_below_by: Some(*g),
            },
            StepSchedule::Power { c, p } => ScheduleProperties {
                sum_diverges: Some(*p <= 1.0),
                sum_squares_converges: Some(*p > 0.5),
                bounded_above_by: Some(*c),
                bounded_below_by: Some(0.0),
            },
            StepSchedule::Custom(_) => ScheduleProperties {
                sum_diverges: None,
                sum_squares_converges: None,
                bounded_above_by: None,
                bounded_below_by: None,
            },
        }
    }

    /// `Σ_{n≥1} γ_n²` in closed form, when the family has one.
    pub fn sum_of_squares(&self) -> Option<f64> {
        match self {
            StepSchedule::Constant(_) => None,
            StepSchedule::Power { c, p } if *p > 0.5 => Some(c * c * zeta(2.0 * p)),
            StepSchedule::Power { .. } => None,
            StepSchedule::Custom(v) => Some(v.iter().map(|g| g * g).sum()),
        }
    }

    pub fn certify(&self, requirement: Requirement) -> Certification {
        if let StepSchedule::Custom(_) = self {
            return Certification::Uncertifiable("custom schedules carry no summability facts".into());
        }
        let props = self.properties();
        match requirement {
            Requirement::RobbinsMonro => {
                if props.sum_diverges != Some(true) {
                    Certification::Fail("sum of steps converges".into())
                } else if props.sum_squares_converges != Some(true) {
                    Certification::Fail("sum of squared steps diverges".into())
                } else {
                    Certification::Pass
                }
            }
            Requirement::OmdWindow { modulus, lipschitz } => {
                if !(modulus > 0.0 && lipschitz > 0.0) {
                    return Certification::Fail(format!(
                        "window needs positive modulus and Lipschitz constant, got {modulus} and {lipschitz}"
                    ));
                }
                let ceiling = modulus / lipschitz;
                match (props.bounded_below_by, props.bounded_above_by) {
                    (Some(lo), _) if lo <= 0.0 => Certification::Fail("inf of steps is 0".into()),
                    (_, Some(hi)) if hi >= ceiling => {
                        Certification::Fail(format!("sup of steps {hi} is not below α/L = {ceiling}"))
                    }
                    (Some(_), Some(_)) => Certification::Pass,
                    _ => Certification::Uncertifiable("missing step bounds".into()),
                }
            }
        }
    }
}

impl fmt::Display for StepSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSchedule::Constant(g) => write!(f, "const:{g}"),
            StepSchedule::Power { c, p } => write!(f, "power:c={c},p={p}"),
            StepSchedule::Custom(v) => {
                let items: Vec<String> = v.iter().map(|g| g.to_string()).collect();
                write!(f, "custom:[{}]", items.join(","))
            }
        }
    }
}

impl FromStr for StepSchedule {
    type Err = Error;

    /// Parses `const:0.1`, `power:c=1,p=1` or `custom:[0.1,0.05]`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unrecognised step schedule `{s}`"));
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
        let (family, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        match family {
            "const" | "constant" => StepSchedule::constant(num(rest)?),
            "power" => {
                let (mut c, mut p) = (None, None);
                for part in rest.split(',') {
                    let (k, v) = part.split_once('=').ok_or_else(bad)?;
                    match k.trim() {
                        "c" => c = Some(num(v)?),
                        "p" => p = Some(num(v)?),
                        _ => return Err(bad()),
                    }
                }
                StepSchedule::power(c.ok_or_else(bad)?, p.ok_or_else(bad)?)
            }
            "custom" => {
                let inner = rest
                    .trim()
                    .strip_prefix('[')
                    .and_then(|r| r.strip_suffix(']'))
                    .ok_or_else(bad)?;
                let steps = if inner.trim().is_empty() {
                    Vec::new()
                } else {
                    inner.split(',').map(num).collect::<Result<Vec<_>>>()?
                };
                StepSchedule::custom(steps)
            }
            _ => Err(bad()),
        }
    }
}

impl From<StepSchedule> for String {
    fn from(s: StepSchedule) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for StepSchedule {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Riemann zeta for real `s > 1`, by Euler–Maclaurin summation.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta is only summed here for s > 1");
    const N: usize = 20;
    // B_2j / (2j)!
    const COEFFS: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let n = N as f64;
    let mut sum: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // rising factorial s(s+1)...(s+2j-2)
    let mut rising = s;
    for (j, coeff) in COEFFS.iter().enumerate() {
        let j = j + 1;
        if j > 1 {
            rising *= (s + 2.0 * j as f64 - 3.0) * (s + 2.0 * j as f64 - 2.0);
        }
        sum += coeff * rising * n.powf(-s - 2.0 * j as f64 + 1.0);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn step_values() {
        assert_eq!(StepSchedule::constant(0.1).unwrap().step_at(7).unwrap(), 0.1);
        assert_eq!(StepSchedule::power(1.0, 1.0).unwrap().step_at(4).unwrap(), 0.25);
        let s = StepSchedule::power(0.5, 0.6).unwrap().step_at(10).unwrap();
        assert_abs_diff_eq!(s, 0.125594321575479, epsilon = 1e-12);
    }

    #[test]
    fn custom_index_error() {
        let s = StepSchedule::custom(vec![0.1, 0.2]).unwrap();
        assert_eq!(s.step_at(2).unwrap(), 0.2);
        assert!(matches!(s.step_at(3), Err(Error::Index { index: 3, len: 2 })));
        assert!(s.step_at(0).is_err());
    }

    #[test]
    fn certification_examples() {
        let harmonic = StepSchedule::power(1.0, 1.0).unwrap();
        assert!(harmonic.certify(Requirement::RobbinsMonro).passed());
        let c = StepSchedule::constant(0.1).unwrap();
        assert!(matches!(c.certify(Requirement::RobbinsMonro), Certification::Fail(_)));
        let window = Requirement::OmdWindow { modulus: 1.0, lipschitz: 1.0 };
        assert!(StepSchedule::constant(0.5).unwrap().certify(window).passed());
        assert!(!StepSchedule::constant(1.0).unwrap().certify(window).passed());
        assert!(!harmonic.certify(window).passed());
        let custom = StepSchedule::custom(vec![0.1]).unwrap();
        assert!(matches!(custom.certify(window), Certification::Uncertifiable(_)));
        assert!(matches!(custom.certify(Requirement::RobbinsMonro), Certification::Uncertifiable(_)));
    }

    #[test]
    fn power_family_matches_p_series_facts() {
        for p in [0.4, 0.5, 0.51, 0.6, 1.0] {
            let s = StepSchedule::power(1.0, p).unwrap();
            let props = s.properties();
            assert_eq!(props.sum_diverges, Some(true));
            assert_eq!(props.sum_squares_converges, Some(p > 0.5));
            assert_eq!(s.certify(Requirement::RobbinsMonro).passed(), p > 0.5);
        }
    }

    #[test]
    fn zeta_reference_values() {
        // reference values from an arbitrary-precision evaluation
        assert_abs_diff_eq!(zeta(2.0), std::f64::consts::PI.powi(2) / 6.0, epsilon = 1e-14);
        assert_abs_diff_eq!(zeta(3.0), 1.20205690315959, epsilon = 1e-13);
        assert_abs_diff_eq!(zeta(1.2), 5.59158244117775, epsilon = 1e-12);
        assert_abs_diff_eq!(zeta(1.02), 50.5786700410156, epsilon = 1e-10);
    }

    #[test]
    fn sums_of_squares() {
        let s = StepSchedule::power(2.0, 1.0).unwrap();
        assert_abs_diff_eq!(s.sum_of_squares().unwrap(), 4.0 * std::f64::consts::PI.powi(2) / 6.0, epsilon = 1e-13);
        assert_eq!(StepSchedule::power(1.0, 0.5).unwrap().sum_of_squares(), None);
        assert_eq!(StepSchedule::constant(0.1).unwrap().sum_of_squares(), None);
        assert_abs_diff_eq!(StepSchedule::custom(vec![0.1, 0.2]).unwrap().sum_of_squares().unwrap(), 0.05, epsilon = 1e-15);
    }

    #[test]
    fn parse_and_display() {
        for text in ["const:0.1", "power:c=1,p=1", "power:c=0.5,p=0.6", "custom:[0.1,0.2]", "custom:[]"] {
            let s: StepSchedule = text.parse().unwrap();
            assert_eq!(s.to_string(), text);
        }
        assert!("const:-1".parse::<StepSchedule>().is_err());
        assert!("power:c=1".parse::<StepSchedule>().is_err());
        assert!("power:c=1,p=1.5".parse::<StepSchedule>().is_err());
        assert!("linear:1".parse::<StepSchedule>().is_err());
    }
}
