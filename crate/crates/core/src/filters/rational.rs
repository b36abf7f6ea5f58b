//! Partial fractions in the `(1 + beta s)^{-p}` form.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// One term `weight * (1 + node s)^{-power}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleTerm {
    #[serde(serialize_with = "ser_complex")]
    pub weight: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub node: Complex64,
    pub power: u32,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

impl PoleTerm {
    pub fn evaluate(&self, s: f64) -> Complex64 {
        self.weight / (ONE + self.node * s).powu(self.power)
    }

    /// `true` for the member of a conjugate pair that is solved explicitly.
    pub fn is_pair_leader(&self) -> bool {
        self.node.im > 0.0
    }

    pub fn is_real(&self) -> bool {
        self.node.im == 0.0
    }
}

/// `constant + sum_j weight_j (1 + node_j s)^{-power_j}`.
///
/// Complex nodes appear in conjugate pairs with conjugate weights, so the
/// sum is real for real `s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialFraction {
    constant: f64,
    terms: Vec<PoleTerm>,
    /// Uniform error bound against the target function, zero when exact.
    approximation_error: f64,
}

impl PartialFraction {
    /// Builds the form and checks conjugate closure.
    pub fn new(constant: f64, terms: Vec<PoleTerm>, approximation_error: f64) -> Result<Self> {
        for t in &terms {
            if t.power == 0 || !t.weight.re.is_finite() || !t.weight.im.is_finite() || !t.node.re.is_finite() || !t.node.im.is_finite() {
                return Err(Error::InvalidArgument(format!("invalid pole term {t:?}")));
            }
            if t.node.im != 0.0 {
                let partner = terms.iter().any(|u| {
                    u.power == t.power && u.node == t.node.conj() && (u.weight - t.weight.conj()).norm() <= 1e-14 * t.weight.norm()
                });
                if !partner {
                    return Err(Error::InvalidArgument(format!(
                        "complex node {} has no conjugate partner",
                        t.node
                    )));
                }
            } else if t.weight.im != 0.0 {
                return Err(Error::InvalidArgument(format!("real node {} with complex weight", t.node)));
            }
        }
        Ok(Self {
            constant,
            terms,
            approximation_error,
        })
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// All terms, both members of every conjugate pair included.
    pub fn terms(&self) -> &[PoleTerm] {
        &self.terms
    }

    /// Total number of first-order factors (the rational degree).
    pub fn degree(&self) -> usize {
        self.nodes().iter().map(|&(_, p)| p as usize).sum()
    }

    pub fn approximation_error(&self) -> f64 {
        self.approximation_error
    }

    pub fn is_exact(&self) -> bool {
        self.approximation_error == 0.0
    }

    /// Distinct nodes with the highest power at which each occurs.
    pub fn nodes(&self) -> Vec<(Complex64, u32)> {
        let mut nodes: Vec<(Complex64, u32)> = Vec::new();
        for t in &self.terms {
            match nodes.iter_mut().find(|(z, _)| *z == t.node) {
                Some((_, p)) => *p = (*p).max(t.power),
                None => nodes.push((t.node, t.power)),
            }
        }
        nodes
    }

    pub fn evaluate_complex(&self, s: f64) -> Complex64 {
        let mut acc = Complex64::new(self.constant, 0.0);
        for t in &self.terms {
            acc += t.evaluate(s);
        }
        acc
    }

    pub fn evaluate(&self, s: f64) -> f64 {
        self.evaluate_complex(s).re
    }

    /// The form of `s -> p(t s)`: every node is multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        Self {
            constant: self.constant,
            terms: self
                .terms
                .iter()
                .map(|p| PoleTerm {
                    node: p.node * t,
                    ..*p
                })
                .collect(),
            approximation_error: self.approximation_error,
        }
    }
}

fn horner_real(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * s + a)
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

fn derivative(c: &[Complex64]) -> Vec<Complex64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect()
}

/// All roots of the polynomial with (low-to-high) coefficients `c` by the
/// Aberth-Ehrlich iteration.
pub(crate) fn polynomial_roots(c: &[f64]) -> Vec<Complex64> {
    let deg = c.len() - 1;
    let lead = c[deg];
    let p: Vec<Complex64> = c.iter().map(|&a| Complex64::new(a / lead, 0.0)).collect();
    let dp = derivative(&p);
    // Cauchy bound for the starting circle
    let radius = 1.0 + p[..deg].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(0.5 * radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64 + 0.4))
        .collect();
    for _ in 0..1000 {
        let mut moved: f64 = 0.0;
        for i in 0..deg {
            let pv = horner(&p, z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / horner(&dp, z[i]);
            let repulsion: Complex64 = (0..deg).filter(|&j| j != i).map(|j| ONE / (z[i] - z[j])).sum();
            let step = ratio / (ONE - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Roots merged into clusters of (numerically) repeated roots.
fn cluster_roots(roots: &[Complex64], coeffs: &[f64]) -> Result<Vec<(Complex64, u32)>> {
    const MERGE: f64 = 1e-5;
    const AMBIGUOUS: f64 = 1e-3;
    let mut remaining: Vec<Complex64> = roots.to_vec();
    let mut out = Vec::new();
    let p: Vec<Complex64> = coeffs.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    while let Some(z) = remaining.pop() {
        let scale = z.norm().max(1.0);
        let (close, rest): (Vec<Complex64>, Vec<Complex64>) =
            remaining.iter().partition(|w| (*w - z).norm() <= MERGE * scale);
        if rest.iter().any(|w| (*w - z).norm() <= AMBIGUOUS * scale) {
            return Err(Error::RepeatedRoots);
        }
        remaining = rest;
        let m = close.len() as u32 + 1;
        let mut rep = (close.iter().sum::<Complex64>() + z) / m as f64;
        // a root of multiplicity m is a simple root of the (m-1)-th derivative
        let mut d = p.clone();
        for _ in 1..m {
            d = derivative(&d);
        }
        let dd = derivative(&d);
        for _ in 0..8 {
            let step = horner(&d, rep) / horner(&dd, rep);
            if !(step.re.is_finite() && step.im.is_finite()) {
                break;
            }
            rep -= step;
        }
        out.push((rep, m));
    }
    Ok(out)
}

fn trim(c: &[f64]) -> &[f64] {
    let len = c.iter().rposition(|&a| a != 0.0).map_or(0, |i| i + 1);
    &c[..len]
}

/// Exact partial fractions of `num(s) / den(s)` (coefficients low to high).
pub fn rational_partial_fractions(num: &[f64], den: &[f64]) -> Result<PartialFraction> {
    let num = trim(num);
    let den = trim(den);
    if den.is_empty() {
        return Err(Error::FilterSyntax("denominator is identically zero".into()));
    }
    if num.iter().chain(den).any(|a| !a.is_finite()) {
        return Err(Error::FilterSyntax("non-finite coefficient".into()));
    }
    let (dn, dd) = (num.len().saturating_sub(1), den.len() - 1);
    if num.len() > den.len() {
        return Err(Error::DegreeMismatch {
            numerator: dn,
            denominator: dd,
        });
    }
    let constant = if num.len() == den.len() { num[dn] / den[dd] } else { 0.0 };
    if dd == 0 {
        return PartialFraction::new(constant, Vec::new(), 0.0);
    }
    if den[0] == 0.0 {
        return Err(Error::NoRationalForm("rational filter with a pole at s = 0".into()));
    }
    let roots = polynomial_roots(den);
    let clusters = cluster_roots(&roots, den)?;

    // nodes beta = -1 / z; snap nearly real roots onto the axis
    let mut nodes: Vec<(Complex64, u32)> = clusters
        .into_iter()
        .map(|(z, m)| {
            let z = if z.im.abs() <= 1e-12 * z.norm() { Complex64::new(z.re, 0.0) } else { z };
            (-ONE / z, m)
        })
        .collect();
    nodes.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));

    // unknown weights c_{node, p}, fitted at complex sample points
    let unknowns: Vec<(Complex64, u32)> = nodes.iter().flat_map(|&(b, m)| (1..=m).map(move |p| (b, p))).collect();
    let u = unknowns.len();
    let root_scale = nodes.iter().map(|(b, _)| 1.0 / b.norm()).fold(1.0, f64::max);
    let samples = 3 * u + 4;
    let pts: Vec<Complex64> = (0..samples)
        .map(|k| {
            let r = root_scale * (0.35 + 2.5 * k as f64 / samples as f64);
            Complex64::from_polar(r, 2.0 * std::f64::consts::PI * (k as f64 * 0.618034).fract())
        })
        .collect();
    let nc: Vec<Complex64> = num.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    let dc: Vec<Complex64> = den.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    let a = DMatrix::from_fn(samples, u, |i, j| {
        let (b, p) = unknowns[j];
        ONE / (ONE + b * pts[i]).powu(p)
    });
    let rhs = DVector::from_fn(samples, |i, _| horner(&nc, pts[i]) / horner(&dc, pts[i]) - constant);
    let svd = a.svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::SolverFailure(format!("partial-fraction fit: {e}")))?;

    let mut terms: Vec<PoleTerm> = Vec::with_capacity(u);
    for (j, &(node, power)) in unknowns.iter().enumerate() {
        let weight = if node.im == 0.0 { Complex64::new(sol[j].re, 0.0) } else { sol[j] };
        terms.push(PoleTerm { weight, node, power });
    }
    // enforce exact conjugate symmetry
    for i in 0..terms.len() {
        if terms[i].node.im <= 0.0 {
            continue;
        }
        let target = terms[i].node.conj();
        let j = (0..terms.len())
            .filter(|&j| terms[j].power == terms[i].power && terms[j].node.im < 0.0)
            .min_by(|&a, &b| (terms[a].node - target).norm().total_cmp(&(terms[b].node - target).norm()))
            .ok_or_else(|| Error::SolverFailure("complex root without a conjugate partner".into()))?;
        if (terms[j].node - target).norm() > 1e-8 * target.norm() {
            return Err(Error::SolverFailure("complex root without a conjugate partner".into()));
        }
        let w = 0.5 * (terms[i].weight + terms[j].weight.conj());
        terms[i].weight = w;
        terms[j].weight = w.conj();
        terms[j].node = target;
    }
    let pf = PartialFraction::new(constant, terms, 0.0)?;

    // re-evaluation check on real points
    for k in 0..=200 {
        let s = if k == 0 { 0.0 } else { 10f64.powf(-3.0 + 5.0 * k as f64 / 200.0) };
        let dv = horner_real(den, s);
        if dv.abs() < 1e-8 * den.iter().map(|a| a.abs()).sum::<f64>() * s.abs().max(1.0).powi(dd as i32) {
            continue;
        }
        let want = horner_real(num, s) / dv;
        let got = pf.evaluate_complex(s);
        let scale = want.abs().max(pf.terms.iter().map(|t| t.evaluate(s).norm()).fold(constant.abs(), f64::max)).max(1e-300);
        if (got.re - want).abs() > 1e-10 * scale || got.im.abs() > 1e-10 * scale {
            return Err(Error::RepeatedRoots);
        }
    }
    Ok(pf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn one_over_one_plus_s_squared() {
        let pf = rational_partial_fractions(&[1.0], &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(pf.constant(), 0.0);
        assert_eq!(pf.terms().len(), 2);
        for t in pf.terms() {
            assert!((t.node.norm() - 1.0).abs() < 1e-12 && t.node.re.abs() < 1e-12);
            assert!((t.weight - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        }
        for k in 0..100 {
            let s = k as f64 * 0.37;
            assert!(close(pf.evaluate(s), 1.0 / (1.0 + s * s), 1e-12));
            assert!(pf.evaluate_complex(s).im.abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_numerator() {
        let pf = rational_partial_fractions(&[1.0, 1.0], &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(pf.constant(), 0.0);
        for k in 0..=1000 {
            let s = k as f64 * 0.1;
            assert!(close(pf.evaluate(s), (1.0 + s) / (1.0 + s * s), 1e-12));
        }
    }

    #[test]
    fn repeated_real_pole_becomes_chain() {
        let pf = rational_partial_fractions(&[1.0], &[1.0, 2.0, 1.0]).unwrap();
        assert_eq!(pf.degree(), 2);
        assert_eq!(pf.nodes(), vec![(Complex64::new(1.0, 0.0), 2)]);
        assert!(close(pf.evaluate(1.0), 0.25, 1e-12));
    }

    #[test]
    fn constant_filter() {
        let pf = rational_partial_fractions(&[3.5], &[1.0]).unwrap();
        assert_eq!(pf.constant(), 3.5);
        assert!(pf.terms().is_empty());
    }

    #[test]
    fn degree_and_pole_errors() {
        assert!(matches!(
            rational_partial_fractions(&[1.0, 0.0, 1.0], &[1.0, 1.0]),
            Err(Error::DegreeMismatch { .. })
        ));
        assert!(matches!(rational_partial_fractions(&[1.0], &[0.0, 1.0]), Err(Error::NoRationalForm(_))));
    }

    #[test]
    fn nearly_repeated_roots_rejected() {
        // (s + 1)(s + 1.0001)
        let den = [1.0001, 2.0001, 1.0];
        assert!(matches!(rational_partial_fractions(&[1.0], &den), Err(Error::RepeatedRoots)));
    }

    #[test]
    fn aberth_finds_cubic_roots() {
        // (s - 1)(s - 2)(s - 3)
        let mut r: Vec<f64> = polynomial_roots(&[-6.0, 11.0, -6.0, 1.0]).iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        for (a, b) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn scaling_multiplies_nodes() {
        let pf = rational_partial_fractions(&[1.0], &[1.0, 1.0]).unwrap();
        let sc = pf.scaled(0.1);
        assert!(close(sc.evaluate(10.0), pf.evaluate(1.0), 1e-15));
    }
}
