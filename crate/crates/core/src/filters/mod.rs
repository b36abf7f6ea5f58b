//! Spectral filters `phi(s)` and their rational partial-fraction forms.

#[allow(clippy::excessive_precision, clippy::type_complexity)]
mod exp_table;
mod rational;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use exp_table::EXP_TABLES;

pub use rational::{rational_partial_fractions, PartialFraction, PoleTerm};

/// Rational degree used when none is given.
pub const DEFAULT_DEGREE: usize = 5;

/// Degrees for which exponential coefficients are compiled in.
pub const EXP_DEGREES: std::ops::RangeInclusive<usize> = 3..=14;

/// A filter applied to the Laplacian spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FilterSpec {
    /// `exp(-t s)`
    Exponential { t: f64 },
    /// `s^{-k/2}`
    Polyharmonic { k: u32 },
    /// `s^{-1/2}`
    CommuteTime,
    /// `s^{1/2} exp(-s^2)`
    MexicanHat,
    /// `cos(t s)`, the real part of the wave filter; truncated path only.
    WaveReal { t: f64 },
    /// `num(s) / den(s)`, coefficients from low to high degree.
    Rational { numerator: Vec<f64>, denominator: Vec<f64> },
    /// Piecewise-linear interpolation of `(s, phi)` samples, constant beyond
    /// the ends.
    Custom { samples: Vec<(f64, f64)> },
}

impl FilterSpec {
    /// Filters with a pole at `s = 0` whose constant mode must be deflated.
    pub fn is_singular_at_zero(&self) -> bool {
        matches!(self, FilterSpec::Polyharmonic { .. } | FilterSpec::CommuteTime)
    }

    /// Short family name for provenance records.
    pub fn family(&self) -> &'static str {
        match self {
            FilterSpec::Exponential { .. } => "exponential",
            FilterSpec::Polyharmonic { .. } => "polyharmonic",
            FilterSpec::CommuteTime => "commute_time",
            FilterSpec::MexicanHat => "mexican_hat",
            FilterSpec::WaveReal { .. } => "wave_real",
            FilterSpec::Rational { .. } => "rational",
            FilterSpec::Custom { .. } => "custom",
        }
    }

    pub fn evaluate(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::InvalidArgument(format!("filter argument {s} must be non-negative")));
        }
        Ok(match self {
            FilterSpec::Exponential { t } => (-t * s).exp(),
            FilterSpec::Polyharmonic { k } => {
                if s == 0.0 {
                    return Err(Error::SingularEvaluation(s));
                }
                s.powf(-(*k as f64) / 2.0)
            }
            FilterSpec::CommuteTime => {
                if s == 0.0 {
                    return Err(Error::SingularEvaluation(s));
                }
                1.0 / s.sqrt()
            }
            FilterSpec::MexicanHat => s.sqrt() * (-s * s).exp(),
            FilterSpec::WaveReal { t } => (t * s).cos(),
            FilterSpec::Rational { numerator, denominator } => {
                let den = denominator.iter().rev().fold(0.0, |acc, &a| acc * s + a);
                if den == 0.0 {
                    return Err(Error::SingularEvaluation(s));
                }
                numerator.iter().rev().fold(0.0, |acc, &a| acc * s + a) / den
            }
            FilterSpec::Custom { samples } => interpolate(samples, s),
        })
    }

    /// The partial-fraction form used by the spectrum-free method: the
    /// degree-`r` exponential approximation (with `t` folded into the nodes)
    /// or the exact decomposition of a rational filter.
    pub fn partial_fraction(&self, r: usize) -> Result<PartialFraction> {
        match self {
            FilterSpec::Exponential { t } => Ok(exp_chebyshev_coefficients(r)?.scaled(*t)),
            FilterSpec::Rational { numerator, denominator } => rational_partial_fractions(numerator, denominator),
            other => Err(Error::NoRationalForm(other.to_string())),
        }
    }
}

fn interpolate(samples: &[(f64, f64)], s: f64) -> f64 {
    let i = samples.partition_point(|&(x, _)| x <= s);
    if i == 0 {
        return samples[0].1;
    }
    if i == samples.len() {
        return samples[i - 1].1;
    }
    let (x0, y0) = samples[i - 1];
    let (x1, y1) = samples[i];
    y0 + (y1 - y0) * (s - x0) / (x1 - x0)
}

/// Best uniform rational approximation of `exp(-s)` on `[0, inf)` of type
/// `(r, r)`, in partial fractions.
pub fn exp_chebyshev_coefficients(r: usize) -> Result<PartialFraction> {
    let table = EXP_TABLES
        .iter()
        .find(|t| t.degree == r)
        .ok_or(Error::UnsupportedDegree(r))?;
    let mut terms = Vec::with_capacity(r);
    for &((wr, wi), (br, bi)) in table.poles {
        let weight = Complex64::new(wr, wi);
        let node = Complex64::new(br, bi);
        terms.push(PoleTerm { weight, node, power: 1 });
        if bi != 0.0 {
            terms.push(PoleTerm {
                weight: weight.conj(),
                node: node.conj(),
                power: 1,
            });
        }
    }
    PartialFraction::new(table.constant, terms, table.max_error)
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::FilterSyntax(format!("'{x}' is not a number")))
        })
        .collect()
}

fn params(rest: &str) -> Result<Vec<(&str, &str)>> {
    rest.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::FilterSyntax(format!("expected key=value, found '{p}'")))
        })
        .collect()
}

fn take<'a>(ps: &[(&str, &'a str)], key: &str, spec: &str) -> Result<&'a str> {
    ps.iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::FilterSyntax(format!("'{spec}' needs parameter '{key}'")))
}

fn check_keys(ps: &[(&str, &str)], allowed: &[&str]) -> Result<()> {
    match ps.iter().find(|(k, _)| !allowed.contains(k)) {
        Some((k, _)) => Err(Error::FilterSyntax(format!("unknown parameter '{k}'"))),
        None => Ok(()),
    }
}

fn positive(v: &str, what: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| Error::FilterSyntax(format!("{what} '{v}' is not a number")))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::FilterSyntax(format!("{what} must be positive, got {v}")))
    }
}

/// Parses the filter mini-language: `exp:t=0.1`, `poly:k=2`, `commute`,
/// `mexican`, `wave:t=1`, `rat:num=1;den=1,0,1` and
/// `custom:s=0,1,10;phi=1,0.5,0`.
impl FromStr for FilterSpec {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let ps = params(rest)?;
        match name.trim().to_ascii_lowercase().as_str() {
            "exp" | "heat" | "diffusion" => {
                check_keys(&ps, &["t"])?;
                Ok(FilterSpec::Exponential {
                    t: positive(take(&ps, "t", spec)?, "t")?,
                })
            }
            "poly" | "polyharmonic" => {
                check_keys(&ps, &["k"])?;
                let v = take(&ps, "k", spec)?;
                let k: u32 = v.parse().map_err(|_| Error::FilterSyntax(format!("k '{v}' is not a positive integer")))?;
                if k == 0 {
                    return Err(Error::FilterSyntax("k must be at least 1".into()));
                }
                Ok(FilterSpec::Polyharmonic { k })
            }
            "commute" => {
                check_keys(&ps, &[])?;
                Ok(FilterSpec::CommuteTime)
            }
            "mexican" => {
                check_keys(&ps, &[])?;
                Ok(FilterSpec::MexicanHat)
            }
            "wave" => {
                check_keys(&ps, &["t"])?;
                Ok(FilterSpec::WaveReal {
                    t: positive(take(&ps, "t", spec)?, "t")?,
                })
            }
            "rat" | "rational" => {
                check_keys(&ps, &["num", "den"])?;
                let numerator = parse_list(take(&ps, "num", spec)?)?;
                let denominator = parse_list(take(&ps, "den", spec)?)?;
                if denominator.iter().all(|&d| d == 0.0) {
                    return Err(Error::FilterSyntax("denominator is identically zero".into()));
                }
                Ok(FilterSpec::Rational { numerator, denominator })
            }
            "custom" => {
                check_keys(&ps, &["s", "phi"])?;
                let s = parse_list(take(&ps, "s", spec)?)?;
                let phi = parse_list(take(&ps, "phi", spec)?)?;
                if s.len() != phi.len() || s.is_empty() {
                    return Err(Error::FilterSyntax("custom filter needs equally many s and phi values".into()));
                }
                if s.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::FilterSyntax("custom sample points must increase strictly".into()));
                }
                Ok(FilterSpec::Custom {
                    samples: s.into_iter().zip(phi).collect(),
                })
            }
            other => Err(Error::FilterSyntax(format!("unknown filter '{other}'"))),
        }
    }
}

fn join(v: impl IntoIterator<Item = f64>) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for FilterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterSpec::Exponential { t } => write!(f, "exp:t={t}"),
            FilterSpec::Polyharmonic { k } => write!(f, "poly:k={k}"),
            FilterSpec::CommuteTime => f.write_str("commute"),
            FilterSpec::MexicanHat => f.write_str("mexican"),
            FilterSpec::WaveReal { t } => write!(f, "wave:t={t}"),
            FilterSpec::Rational { numerator, denominator } => {
                write!(f, "rat:num={};den={}", join(numerator.iter().copied()), join(denominator.iter().copied()))
            }
            FilterSpec::Custom { samples } => write!(
                f,
                "custom:s={};phi={}",
                join(samples.iter().map(|p| p.0)),
                join(samples.iter().map(|p| p.1))
            ),
        }
    }
}
