//! Gauss rules from moment sequences, and the spectral-efficiency / MMSE
//! functionals evaluated with them.

mod functionals;
mod law;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::aem::MomentSequence;
use crate::error::{Error, Result};

pub use functionals::{
    closed_form_f, closed_form_mmse, closed_form_mmse_eff, closed_form_opt, ebn0_of_snr, expectation,
    mmse_value, snr_of_ebn0, spectral_efficiency_mmse_lb, spectral_efficiency_opt,
};
pub use law::SpectralLaw;

/// Default rule sizes for unfaded and faded laws.
pub const DEFAULT_POINTS_UNFADED: usize = 10;
pub const DEFAULT_POINTS_FADED: usize = 15;

/// Nodes and positive weights of a Gauss rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    requested: usize,
    warning: Option<String>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of points asked for; larger than [`len`](Self::len) (less
    /// any atom node) when the recurrence broke down early.
    pub fn requested(&self) -> usize {
        self.requested
    }

    /// Set when the rule was truncated after a Hankel breakdown.
    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    /// `Σ w_q x_q^n`.
    pub fn moment(&self, n: usize) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * x.powi(n as i32))
            .sum()
    }
}

/// Where the continuous part of a law is believed to live; `atom` is the
/// mass of an optional point mass at zero, split off before the rule is
/// built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportHint {
    pub lo: f64,
    pub hi: f64,
    pub atom: f64,
}

impl SupportHint {
    pub fn interval(lo: f64, hi: f64) -> Self {
        SupportHint { lo, hi, atom: 0.0 }
    }

    /// `[0, m_1 + 10σ]`, for laws without a known support.
    pub fn from_spread(m: &MomentSequence) -> Result<Self> {
        let (mean, var) = m.mean_variance()?;
        Ok(SupportHint::interval(0.0, mean + 10.0 * var.max(0.0).sqrt()))
    }
}

/// `Q`-point Gauss rule for the law with moments `m`.
///
/// Recurrence coefficients come from the modified Chebyshev algorithm, with
/// modified moments taken against the monic Chebyshev polynomials of the
/// hint interval; nodes and weights from the eigen-decomposition of the
/// Jacobi matrix. If `hint.atom > 0` the atom is removed first (moments of
/// the continuous part are `m_n / (1 − atom)`) and re-attached as node 0.
///
/// If the recurrence loses positivity at order `q < Q`, or a node lands
/// below the hint interval, the largest clean rule is returned with a
/// warning. Breakdown at the first order is an error.
pub fn gauss_rule(m: &MomentSequence, q: usize, hint: SupportHint) -> Result<QuadratureRule> {
    if q == 0 {
        return Err(Error::invalid("quadrature rule needs at least one point"));
    }
    if !(hint.lo < hint.hi) || !hint.lo.is_finite() || !hint.hi.is_finite() {
        return Err(Error::invalid(format!("bad support hint [{}, {}]", hint.lo, hint.hi)));
    }
    if !(0.0..1.0).contains(&hint.atom) {
        return Err(Error::invalid(format!("atom mass {} outside [0, 1)", hint.atom)));
    }
    let needed = 2 * q - 1;
    if m.len() < needed {
        return Err(Error::Insufficient { what: "Gauss rule moments", needed, available: m.len() });
    }
    let scale = 1.0 / (1.0 - hint.atom);
    let mut raw = Vec::with_capacity(2 * q);
    raw.push(1.0);
    raw.extend(m.values()[..needed].iter().map(|v| v * scale));

    let (alpha, beta, mut warning) = modified_chebyshev(&raw, q, hint.lo, hint.hi)?;
    // roundoff in near-degenerate laws shows up as nodes below the support
    let slack = 1e-8 * (hint.hi - hint.lo);
    let mut k = alpha.len();
    let (mut nodes, mut weights) = golub_welsch(&alpha, &beta);
    while k > 1 && nodes.iter().zip(&weights).any(|(&x, &w)| x < hint.lo - slack || !(w > 0.0)) {
        k -= 1;
        (nodes, weights) = golub_welsch(&alpha[..k], &beta[..k]);
        warning = Some(format!("nodes fell below the support interval; returning the {k}-point rule"));
    }
    if hint.atom > 0.0 {
        for w in weights.iter_mut() {
            *w /= scale;
        }
        nodes.insert(0, 0.0);
        weights.insert(0, hint.atom);
    }
    Ok(QuadratureRule { nodes, weights, requested: q, warning })
}

/// Recurrence coefficients `(α_k, β_k)` for `k < q` (fewer on breakdown).
fn modified_chebyshev(raw: &[f64], q: usize, lo: f64, hi: f64) -> Result<(Vec<f64>, Vec<f64>, Option<String>)> {
    let n = 2 * q;
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    // monic Chebyshev recurrence on [lo, hi]: p_{k+1} = (x − c) p_k − b_k p_{k−1}
    let a = vec![c; n];
    let mut b = vec![h * h / 4.0; n];
    b[0] = 0.0;
    if n > 1 {
        b[1] = h * h / 2.0;
    }

    // modified moments ν_k = Σ_i coef_{k,i} m_i, from power-basis coefficients
    let mut nu = vec![0.0; n];
    let mut prev: Vec<f64> = Vec::new();
    let mut cur = vec![1.0];
    for k in 0..n {
        nu[k] = cur.iter().zip(raw).map(|(p, m)| p * m).sum();
        let mut next = vec![0.0; k + 2];
        for (i, &p) in cur.iter().enumerate() {
            next[i + 1] += p;
            next[i] -= a[k] * p;
        }
        for (i, &p) in prev.iter().enumerate() {
            next[i] -= b[k] * p;
        }
        prev = cur;
        cur = next;
    }

    let mut alpha = vec![a[0] + nu[1] / nu[0]];
    let mut beta = vec![nu[0]];
    if !(nu[0] > 0.0) || !alpha[0].is_finite() {
        return Err(Error::HankelBreakdown { order: 1, detail: format!("zeroth modified moment {}", nu[0]) });
    }
    let mut sigma_prev = vec![0.0; n];
    let mut sigma = nu;
    for k in 1..q {
        let mut next = vec![0.0; n];
        for l in k..n - k {
            next[l] = sigma[l + 1] - (alpha[k - 1] - a[l]) * sigma[l] - beta[k - 1] * sigma_prev[l]
                + b[l] * sigma[l - 1];
        }
        let ak = a[k] + next[k + 1] / next[k] - sigma[k] / sigma[k - 1];
        let bk = next[k] / sigma[k - 1];
        if !(bk > 0.0) || !ak.is_finite() || !bk.is_finite() {
            let warning = format!(
                "Hankel breakdown at order {}: recurrence coefficient {bk}; returning the {k}-point rule",
                k + 1
            );
            return Ok((alpha, beta, Some(warning)));
        }
        alpha.push(ak);
        beta.push(bk);
        sigma_prev = sigma;
        sigma = next;
    }
    Ok((alpha, beta, None))
}

fn golub_welsch(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let q = alpha.len();
    let jacobi = DMatrix::from_fn(q, q, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[j].sqrt()
        } else if j + 1 == i {
            beta[i].sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..q)
        .map(|i| (eig.eigenvalues[i], beta[0] * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs.into_iter().unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aem::{mp_moments, mp_support, mp_atom};

    #[test]
    fn point_mass_gives_single_node() {
        let m = MomentSequence::point_mass(1.7, 4);
        let r = gauss_rule(&m, 1, SupportHint::interval(0.0, 4.0)).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r.nodes()[0] - 1.7).abs() < 1e-14);
        assert!((r.weights()[0] - 1.0).abs() < 1e-14);
        // a second point does not exist; the recurrence breaks down
        let r = gauss_rule(&m, 2, SupportHint::interval(0.0, 4.0)).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r.warning().is_some());
    }

    #[test]
    fn uniform_two_point() {
        let m = MomentSequence::new("u", (1..=4).map(|n| 1.0 / (n as f64 + 1.0)).collect());
        let r = gauss_rule(&m, 2, SupportHint::interval(0.0, 1.0)).unwrap();
        let d = 0.5 / 3f64.sqrt();
        assert!((r.nodes()[0] - (0.5 - d)).abs() < 1e-14);
        assert!((r.nodes()[1] - (0.5 + d)).abs() < 1e-14);
        assert!((r.weights()[0] - 0.5).abs() < 1e-14 && (r.weights()[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn legendre_ten_point() {
        // uniform on [−1, 1]
        let m = MomentSequence::new(
            "u",
            (1..=19).map(|n| if n % 2 == 1 { 0.0 } else { 1.0 / (n + 1) as f64 }).collect(),
        );
        let r = gauss_rule(&m, 10, SupportHint::interval(-1.0, 1.0)).unwrap();
        assert!(r.warning().is_none());
        assert!((r.nodes()[9] - 0.973_906_528_517_171_7).abs() < 1e-12);
        assert!((r.weights()[9] - 0.5 * 0.066_671_344_308_688_1).abs() < 1e-12);
        for n in 1..20 {
            assert!((r.moment(n) - m.get(n).unwrap()).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn marchenko_pastur_rules_are_exact() {
        for &beta in &[0.25, 0.5, 1.0, 1.5, 2.0] {
            let m = mp_moments(21, beta).unwrap();
            let (a, b) = mp_support(beta);
            let hint = SupportHint { lo: a, hi: b, atom: mp_atom(beta) };
            let r = gauss_rule(&m, 10, hint).unwrap();
            assert!(r.warning().is_none(), "beta={beta}");
            assert!((r.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(r.weights().iter().all(|&w| w > 0.0));
            for (i, &x) in r.nodes().iter().enumerate() {
                if hint.atom > 0.0 && i == 0 {
                    assert_eq!(x, 0.0);
                } else {
                    assert!(x > a && x < b, "beta={beta} node {x}");
                }
            }
            for n in 1..20 {
                let rel = (r.moment(n) - m.get(n).unwrap()).abs() / m.get(n).unwrap();
                assert!(rel < 1e-7, "beta={beta} n={n} rel={rel}");
            }
        }
    }

    #[test]
    fn validation() {
        let m = mp_moments(5, 1.0).unwrap();
        assert!(gauss_rule(&m, 0, SupportHint::interval(0.0, 4.0)).is_err());
        assert!(matches!(
            gauss_rule(&m, 4, SupportHint::interval(0.0, 4.0)),
            Err(Error::Insufficient { .. })
        ));
        assert!(gauss_rule(&m, 2, SupportHint::interval(4.0, 0.0)).is_err());
        let bad = MomentSequence::new("neg", vec![0.0, -1.0, 0.0]);
        assert!(matches!(
            gauss_rule(&bad, 2, SupportHint::interval(-1.0, 1.0)),
            Ok(ref r) if r.len() == 1
        ));
    }

    proptest::proptest! {
        #[test]
        fn rules_reproduce_discrete_measures(
            atoms in proptest::collection::vec((0.05f64..3.95, 0.05f64..1.0), 1..5)
        ) {
            let mut xs: Vec<f64> = atoms.iter().map(|a| a.0).collect();
            xs.sort_by(f64::total_cmp);
            proptest::prop_assume!(xs.windows(2).all(|w| w[1] - w[0] > 0.05));
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            let q = atoms.len();
            let m = MomentSequence::new(
                "atoms",
                (1..2 * q).map(|n| atoms.iter().map(|(x, w)| w * x.powi(n as i32)).sum::<f64>() / total).collect(),
            );
            let r = gauss_rule(&m, q, SupportHint::interval(0.0, 4.0)).unwrap();
            proptest::prop_assert!(r.weights().iter().all(|&w| w > 0.0));
            for n in 1..2 * q {
                let v = m.get(n).unwrap();
                proptest::prop_assert!((r.moment(n) - v).abs() <= 1e-7 * v, "n={} {} vs {}", n, r.moment(n), v);
            }
        }
    }
}
