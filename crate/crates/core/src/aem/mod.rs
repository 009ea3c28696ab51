//! Closed-form asymptotic eigenvalue moments and free cumulants.
//!
//! Every formula here is a sum over class-size profiles of noncrossing
//! partitions, weighted by exact integer counts from [`crate::nc`]. Two
//! kernels cover all of them: a single-profile sum (moments from free
//! cumulants) and a profile-pair sum over a partition and its Kreweras
//! complement (free multiplicative convolution).

mod sequence;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::nc::{count_by_profile, count_by_profile_pair, narayana, profiles, ClassSizeProfile};
use crate::waveform::WMomentTable;

pub use sequence::{FreeCumulantSequence, MomentSequence, PowerMomentSpec};
pub(crate) use sequence::format_value;

/// Default length of moment tables: enough for a 10-point Gauss rule.
pub const DEFAULT_N_MAX: usize = 20;

fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::invalid("moment order must be >= 1"))
    } else {
        Ok(())
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        Err(Error::invalid(format!("load beta must be finite and >= 0, got {beta}")))
    } else {
        Ok(())
    }
}

fn check_table(len: usize, n: usize, what: &'static str) -> Result<()> {
    if len < n {
        Err(Error::Insufficient { what, needed: n, available: len })
    } else {
        Ok(())
    }
}

/// `Σ_p weight(p) Σ_{b ∈ profiles(n, p)} count(b) Π table[b_r]`, visiting
/// part counts in the given order.
fn profile_sum(
    n: usize,
    order: impl Iterator<Item = usize>,
    weight: impl Fn(usize) -> f64,
    table: &[f64],
) -> Result<f64> {
    let mut total = 0.0;
    for parts in order {
        let w = weight(parts);
        if w == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for b in profiles(n, parts)? {
            inner += count_by_profile(&b)? as f64 * b.product_of(table);
        }
        total += w * inner;
    }
    Ok(total)
}

/// `Σ_p weight(p) Σ_{b, c} count_pair(b, c) Π first[b_r] Π second[c_t]`,
/// where `b` has `p` parts and `c` has `n − p + 1`.
fn profile_pair_sum(n: usize, weight: impl Fn(usize) -> f64, first: &[f64], second: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for parts in 1..=n {
        let w = weight(parts);
        if w == 0.0 {
            continue;
        }
        let complements = profiles(n, n - parts + 1)?;
        let mut inner = 0.0;
        for b in profiles(n, parts)? {
            let pb = b.product_of(first);
            for c in &complements {
                inner += count_by_profile_pair(&b, c)? as f64 * pb * c.product_of(second);
            }
        }
        total += w * inner;
    }
    Ok(total)
}

/// `n`-th moment of the Marčenko-Pastur law with ratio `beta`:
/// `Σ_j narayana(n, j) β^{j−1}`.
pub fn mp_moment(n: usize, beta: f64) -> Result<f64> {
    check_order(n)?;
    check_beta(beta)?;
    let mut total = 0.0;
    for j in 1..=n {
        total += narayana(n, j)? as f64 * beta.powi(j as i32 - 1);
    }
    Ok(total)
}

pub fn mp_moments(n_max: usize, beta: f64) -> Result<MomentSequence> {
    let values = (1..=n_max).map(|n| mp_moment(n, beta)).collect::<Result<Vec<_>>>()?;
    Ok(MomentSequence::new(format!("cs beta={beta}"), values))
}

/// Support `[(1−√β)², (1+√β)²]` of the continuous part.
pub fn mp_support(beta: f64) -> (f64, f64) {
    let s = beta.sqrt();
    ((1.0 - s).powi(2), (1.0 + s).powi(2))
}

/// Mass `(1 − 1/β)^+` of the atom at zero.
pub fn mp_atom(beta: f64) -> f64 {
    if beta > 1.0 {
        1.0 - 1.0 / beta
    } else {
        0.0
    }
}

/// Continuous part of the Marčenko-Pastur density.
pub fn mp_density(x: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid("mp_density needs beta > 0"));
    }
    if x == 0.0 {
        return Err(Error::invalid("the Marčenko-Pastur density at 0 is the atom; use mp_atom"));
    }
    let (a, b) = mp_support(beta);
    let v = (x - a).max(0.0) * (b - x).max(0.0);
    Ok(v.sqrt() / (2.0 * std::f64::consts::PI * beta * x))
}

/// `μ((A†R_cs A)^n)`: `Σ_j β^{j−1} Σ_{j-part c} count(c) Π P^(c_r)`.
pub fn aem_cs_faded(n: usize, beta: f64, power: &PowerMomentSpec) -> Result<f64> {
    check_order(n)?;
    check_beta(beta)?;
    let p = power.table(n)?;
    profile_sum(n, 1..=n, |parts| beta.powi(parts as i32 - 1), &p)
}

/// Chip-asynchronous moment `μ(R_ca^n)`:
/// `Σ_j β^{j−1} Σ_{(n−j+1)-part b} n(n−1)⋯(j+1)/f(b) Π W^(b_r)`.
pub fn aem_ca(n: usize, beta: f64, w: &WMomentTable) -> Result<f64> {
    check_order(n)?;
    check_beta(beta)?;
    check_table(w.len(), n, "spectral moment table")?;
    quadratic_form_kernel(n, beta, w.values())
}

/// `μ((A†R_ca A)^n)`: pair sum with `W` on the partition and `P` on its
/// complement.
pub fn aem_ca_faded(n: usize, beta: f64, w: &WMomentTable, power: &PowerMomentSpec) -> Result<f64> {
    check_order(n)?;
    check_beta(beta)?;
    check_table(w.len(), n, "spectral moment table")?;
    let p = power.table(n)?;
    profile_pair_sum(n, |parts| beta.powi((n - parts) as i32), w.values(), &p)
}

/// `μ((CᵀSC)^n)` for a random spreading matrix `C` of load `β` and a
/// symmetric `S` with moments `s`. Same kernel as [`aem_ca`].
pub fn quadratic_form_moments(n: usize, beta: f64, s: &MomentSequence) -> Result<f64> {
    check_order(n)?;
    check_beta(beta)?;
    s.require(n, "quadratic form moments")?;
    quadratic_form_kernel(n, beta, s.values())
}

fn quadratic_form_kernel(n: usize, beta: f64, table: &[f64]) -> Result<f64> {
    // a partition into p classes carries β^{n−p}; ascending powers of β keep
    // the unit-table case bit-identical to mp_moment
    profile_sum(n, (1..=n).rev(), |parts| beta.powi((n - parts) as i32), table)
}

/// Moment tables `1..=n_max` for each closed form.
pub fn aem_cs_faded_moments(n_max: usize, beta: f64, power: &PowerMomentSpec) -> Result<MomentSequence> {
    let values = (1..=n_max).map(|n| aem_cs_faded(n, beta, power)).collect::<Result<Vec<_>>>()?;
    Ok(MomentSequence::new(format!("cs-faded beta={beta} fading={}", power.name()), values))
}

pub fn aem_ca_moments(n_max: usize, beta: f64, w: &WMomentTable) -> Result<MomentSequence> {
    let values = (1..=n_max).map(|n| aem_ca(n, beta, w)).collect::<Result<Vec<_>>>()?;
    Ok(MomentSequence::new(format!("ca beta={beta} waveform={}", w.waveform()), values))
}

pub fn aem_ca_faded_moments(
    n_max: usize,
    beta: f64,
    w: &WMomentTable,
    power: &PowerMomentSpec,
) -> Result<MomentSequence> {
    let values = (1..=n_max)
        .map(|n| aem_ca_faded(n, beta, w, power))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentSequence::new(
        format!("ca-faded beta={beta} waveform={} fading={}", w.waveform(), power.name()),
        values,
    ))
}

/// Free cumulants of the chip-synchronous law: `c_n = β^{n−1}`.
pub fn cs_cumulants(n_max: usize, beta: f64) -> FreeCumulantSequence {
    FreeCumulantSequence::new(
        format!("cs beta={beta}"),
        (1..=n_max).map(|n| beta.powi(n as i32 - 1)).collect(),
    )
}

/// Free cumulants of the chip-asynchronous law: `c_n = W^(n) β^{n−1}`.
pub fn ca_cumulants(n_max: usize, beta: f64, w: &WMomentTable) -> Result<FreeCumulantSequence> {
    check_table(w.len(), n_max, "spectral moment table")?;
    Ok(FreeCumulantSequence::new(
        format!("ca beta={beta} waveform={}", w.waveform()),
        (1..=n_max).map(|n| w.values()[n - 1] * beta.powi(n as i32 - 1)).collect(),
    ))
}

/// `S_k = (−1)^{k−1} C(2k−2, k−1)/k`, the free cumulants' Möbius weights.
pub fn s_coefficient(k: usize) -> Result<i128> {
    check_order(k)?;
    let c = crate::nc::catalan(k - 1)?;
    let c = i128::try_from(c).map_err(|_| Error::Overflow("signed Catalan number"))?;
    Ok(if k % 2 == 1 { c } else { -c })
}

/// `m_n = Σ_{π ∈ NC(n)} Π_{V∈π} c_{|V|}` for `n = 1..=n_max`.
pub fn moments_from_cumulants(c: &FreeCumulantSequence, n_max: usize) -> Result<MomentSequence> {
    c.require(n_max, "moments from cumulants")?;
    let values = (1..=n_max)
        .map(|n| profile_sum(n, 1..=n, |_| 1.0, c.values()))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentSequence::new(c.label.clone(), values))
}

/// `c_n = Σ_{π ∈ NC(n)} Π_{V∈π} m_{|V|} Π_{U∈KC(π)} S_{|U|}`.
///
/// The signed sum cancels heavily once moments grow, so it is accumulated
/// in exact rational arithmetic from the (exactly representable) inputs and
/// rounded once at the end.
pub fn cumulants_from_moments(m: &MomentSequence, n_max: usize) -> Result<FreeCumulantSequence> {
    m.require(n_max, "cumulants from moments")?;
    let moments = m.values()[..n_max]
        .iter()
        .map(|&v| {
            BigRational::from_float(v).ok_or_else(|| Error::NonFinite(format!("moment {v}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let s = (1..=n_max)
        .map(|k| s_coefficient(k).map(|v| BigRational::from_integer(BigInt::from(v))))
        .collect::<Result<Vec<_>>>()?;
    let mut values = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut total = BigRational::zero();
        for parts in 1..=n {
            let complements = profiles(n, n - parts + 1)?;
            for b in profiles(n, parts)? {
                let pb = exact_product(&b, &moments);
                for c in &complements {
                    let weight = BigInt::from(count_by_profile_pair(&b, c)?);
                    total += &pb * exact_product(c, &s) * weight;
                }
            }
        }
        values.push(total.to_f64().unwrap_or(f64::NAN));
    }
    Ok(FreeCumulantSequence::new(m.label.clone(), values))
}

fn exact_product(p: &ClassSizeProfile, table: &[BigRational]) -> BigRational {
    p.sizes()
        .iter()
        .fold(BigRational::from_integer(BigInt::from(1)), |acc, &s| acc * &table[s - 1])
}

/// Moments of the free additive convolution: cumulants add.
pub fn free_add(b: &MomentSequence, c: &MomentSequence, n_max: usize) -> Result<MomentSequence> {
    let kb = cumulants_from_moments(b, n_max)?;
    let kc = cumulants_from_moments(c, n_max)?;
    let sum: Vec<f64> = kb.values().iter().zip(kc.values()).map(|(x, y)| x + y).collect();
    let mut out = moments_from_cumulants(&FreeCumulantSequence::new("", sum), n_max)?;
    out.label = format!("({}) + ({})", b.label, c.label);
    Ok(out)
}

/// Moments of `BC` for free `B`, `C`:
/// `Σ_{π} Π_{V∈π} c_{|V|}(B) Π_{U∈KC(π)} μ(C^{|U|})`.
pub fn free_multiply(b: &FreeCumulantSequence, c: &MomentSequence, n_max: usize) -> Result<MomentSequence> {
    b.require(n_max, "free multiply")?;
    c.require(n_max, "free multiply")?;
    let values = (1..=n_max)
        .map(|n| profile_pair_sum(n, |_| 1.0, b.values(), c.values()))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentSequence::new(format!("({}) x ({})", b.label, c.label), values))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::nc::{enumerate_nc, kreweras, SetPartition};
    use crate::waveform::ChipWaveform;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    /// Sum over every noncrossing partition of products over its classes.
    fn brute_moment(n: usize, c: &[f64]) -> f64 {
        enumerate_nc(n)
            .unwrap()
            .iter()
            .map(|p| p.classes().iter().map(|v| c[v.len() - 1]).product::<f64>())
            .sum()
    }

    /// Sum over partitions and complements, classes of π weighted by `first`.
    fn brute_pair(n: usize, first: &[f64], second: &[f64]) -> f64 {
        enumerate_nc(n)
            .unwrap()
            .iter()
            .map(|p: &SetPartition| {
                let k = kreweras(p).unwrap();
                p.classes().iter().map(|v| first[v.len() - 1]).product::<f64>()
                    * k.classes().iter().map(|u| second[u.len() - 1]).product::<f64>()
            })
            .sum()
    }

    fn srrc_table(alpha: f64, n: usize) -> WMomentTable {
        WMomentTable::new(&ChipWaveform::srrc(alpha).unwrap(), n).unwrap()
    }

    #[test]
    fn marchenko_pastur_values() {
        assert_eq!(mp_moment(1, 0.3).unwrap(), 1.0);
        assert!(close(mp_moment(2, 0.5).unwrap(), 1.5, 1e-15));
        assert_eq!(mp_moment(3, 1.0).unwrap(), 5.0);
        let cat: Vec<f64> = mp_moments(5, 1.0).unwrap().values().to_vec();
        assert_eq!(cat, vec![1.0, 2.0, 5.0, 14.0, 42.0]);
        for n in 1..6 {
            assert_eq!(mp_moment(n, 0.0).unwrap(), 1.0);
        }
        assert!(mp_moment(0, 1.0).is_err());
        assert!(mp_moment(2, -1.0).is_err());
    }

    #[test]
    fn marchenko_pastur_density() {
        assert_eq!(mp_density(4.0, 1.0).unwrap(), 0.0);
        // √(2·2)/(2π·2)
        assert!(close(mp_density(2.0, 1.0).unwrap(), 0.5 / std::f64::consts::PI, 1e-15));
        assert_eq!(mp_atom(0.25), 0.0);
        assert_eq!(mp_atom(2.0), 0.5);
        assert!(mp_density(0.0, 1.0).is_err());
        for &beta in &[0.25, 1.0, 2.0] {
            let (a, b) = mp_support(beta);
            let mass = crate::numeric::integrate(|x| mp_density(x, beta).unwrap(), a.max(1e-300), b, 1e-10, 1e-12)
                .unwrap()
                .value;
            assert!((mass - 1f64.min(1.0 / beta)).abs() < 1e-6, "beta={beta} mass={mass}");
        }
    }

    #[test]
    fn faded_chip_synchronous() {
        let ray = PowerMomentSpec::rayleigh();
        assert!(close(aem_cs_faded(2, 1.0, &ray).unwrap(), 3.0, 1e-15));
        for n in 1..=10 {
            for &beta in &[0.0, 0.5, 2.0] {
                let un = aem_cs_faded(n, beta, &PowerMomentSpec::unfaded()).unwrap();
                assert!(close(un, mp_moment(n, beta).unwrap(), 1e-13));
            }
        }
        let p = PowerMomentSpec::custom(vec![0.7]).unwrap();
        assert_eq!(aem_cs_faded(1, 3.0, &p).unwrap(), 0.7);
        assert!(matches!(aem_cs_faded(2, 1.0, &p), Err(Error::Insufficient { .. })));
    }

    #[test]
    fn chip_asynchronous_examples() {
        let w = srrc_table(0.5, 8);
        assert!(close(aem_ca(2, 0.5, &w).unwrap(), 1.4375, 1e-12));
        assert!(close(aem_ca(1, 0.5, &w).unwrap(), 1.0, 1e-12));
        let sinc = WMomentTable::unit(8);
        for n in 1..=8 {
            assert_eq!(aem_ca(n, 0.7, &sinc).unwrap(), mp_moment(n, 0.7).unwrap());
        }
        let short = WMomentTable::unit(2);
        assert!(aem_ca(3, 1.0, &short).is_err());
    }

    #[test]
    fn faded_chip_asynchronous_examples() {
        let ray = PowerMomentSpec::rayleigh();
        let sinc = WMomentTable::unit(8);
        assert!(close(aem_ca_faded(2, 1.0, &sinc, &ray).unwrap(), 3.0, 1e-15));
        let full = srrc_table(1.0, 8);
        assert!(close(aem_ca_faded(2, 1.0, &full, &ray).unwrap(), 2.75, 1e-12));
        let w = srrc_table(0.5, 8);
        for n in 1..=8 {
            let a = aem_ca_faded(n, 0.5, &w, &PowerMomentSpec::unfaded()).unwrap();
            assert!(close(a, aem_ca(n, 0.5, &w).unwrap(), 1e-13));
        }
    }

    #[test]
    fn quadratic_forms() {
        let point = MomentSequence::point_mass(1.0, 6);
        for n in 1..=6 {
            assert!(close(quadratic_form_moments(n, 0.4, &point).unwrap(), mp_moment(n, 0.4).unwrap(), 1e-14));
        }
        let s = MomentSequence::new("s", vec![1.0, 2.0]);
        assert!(close(quadratic_form_moments(2, 1.0, &s).unwrap(), 3.0, 1e-15));
        let w = srrc_table(0.25, 6);
        let as_seq = MomentSequence::new("w", w.values().to_vec());
        for n in 1..=6 {
            assert_eq!(quadratic_form_moments(n, 0.8, &as_seq).unwrap(), aem_ca(n, 0.8, &w).unwrap());
        }
    }

    #[test]
    fn signed_catalan() {
        assert_eq!(s_coefficient(1).unwrap(), 1);
        assert_eq!(s_coefficient(2).unwrap(), -1);
        assert_eq!(s_coefficient(3).unwrap(), 2);
        assert_eq!(s_coefficient(4).unwrap(), -5);
        assert!(s_coefficient(0).is_err());
    }

    #[test]
    fn transform_examples() {
        let one = FreeCumulantSequence::new("delta", {
            let mut v = vec![0.0; 8];
            v[0] = 1.0;
            v
        });
        let m = moments_from_cumulants(&one, 8).unwrap();
        assert!(m.values().iter().all(|&x| x == 1.0));
        let back = cumulants_from_moments(&m, 8).unwrap();
        assert!(close(back.values()[0], 1.0, 1e-15));
        assert!(back.values()[1..].iter().all(|x| x.abs() < 1e-12));

        for &beta in &[0.25, 1.0, 2.0] {
            let m = moments_from_cumulants(&cs_cumulants(10, beta), 10).unwrap();
            for n in 1..=10 {
                assert!(close(m.values()[n - 1], mp_moment(n, beta).unwrap(), 1e-12));
            }
            let c = cumulants_from_moments(&mp_moments(10, beta).unwrap(), 10).unwrap();
            for n in 1..=10 {
                assert!(close(c.values()[n - 1], beta.powi(n as i32 - 1), 1e-9));
            }
        }
        let w = srrc_table(0.5, 8);
        let m = moments_from_cumulants(&ca_cumulants(8, 0.6, &w).unwrap(), 8).unwrap();
        for n in 1..=8 {
            assert!(close(m.values()[n - 1], aem_ca(n, 0.6, &w).unwrap(), 1e-12));
        }
        // unfaded D at β = 1: c_n = μ(D^n) β^{n−1} = 1
        let seq = aem_cs_faded_moments(8, 1.0, &PowerMomentSpec::unfaded()).unwrap();
        let c = cumulants_from_moments(&seq, 8).unwrap();
        assert!(c.values().iter().all(|x| close(*x, 1.0, 1e-10)));
    }

    #[test]
    fn profile_sums_match_enumeration() {
        let c = [0.3, -1.2, 0.7, 2.0, -0.4, 1.1, 0.9, -0.6];
        let m = [1.0, 1.7, 3.1, 6.2, 12.9, 27.5, 60.1, 133.0];
        let cum = FreeCumulantSequence::new("c", c.to_vec());
        let mom = MomentSequence::new("m", m.to_vec());
        let from_c = moments_from_cumulants(&cum, 8).unwrap();
        let product = free_multiply(&cum, &mom, 8).unwrap();
        for n in 1..=8 {
            assert!(close(from_c.values()[n - 1], brute_moment(n, &c), 1e-13));
            assert!(close(product.values()[n - 1], brute_pair(n, &c, &m), 1e-13));
        }
    }

    #[test]
    fn free_additive_examples() {
        let x = mp_moments(8, 0.5).unwrap();
        let zero = MomentSequence::point_mass(0.0, 8);
        let y = free_add(&x, &zero, 8).unwrap();
        for n in 0..8 {
            assert!(close(y.values()[n], x.values()[n], 1e-12));
        }
        let (b1, b2) = (0.3, 0.8);
        let s = free_add(&mp_moments(8, b1).unwrap(), &mp_moments(8, b2).unwrap(), 8).unwrap();
        assert!(close(s.values()[1], 4.0 + b1 + b2, 1e-12));
        let c = cumulants_from_moments(&s, 8).unwrap();
        for n in 1..=8 {
            assert!(close(c.values()[n - 1], b1.powi(n as i32 - 1) + b2.powi(n as i32 - 1), 1e-9));
        }
        // semicircles of variance σ² add to variance 2σ²; m_4 = 2 v²
        let sigma2 = 0.7;
        let semi = moments_from_cumulants(&FreeCumulantSequence::new("sc", vec![0.0, sigma2, 0.0, 0.0]), 4).unwrap();
        let sum = free_add(&semi, &semi, 4).unwrap();
        assert!(close(sum.values()[1], 2.0 * sigma2, 1e-14));
        assert!(close(sum.values()[3], 8.0 * sigma2 * sigma2, 1e-13));
        assert!(sum.values()[0].abs() < 1e-15 && sum.values()[2].abs() < 1e-14);
    }

    #[test]
    fn free_multiplicative_examples() {
        let identity = MomentSequence::point_mass(1.0, 8);
        let c = ca_cumulants(8, 0.9, &srrc_table(0.5, 8)).unwrap();
        let a = free_multiply(&c, &identity, 8).unwrap();
        let b = moments_from_cumulants(&c, 8).unwrap();
        for n in 0..8 {
            assert!(close(a.values()[n], b.values()[n], 1e-13));
        }
        let ray = MomentSequence::new("ray", PowerMomentSpec::rayleigh().table(8).unwrap());
        let cs_ray = free_multiply(&cs_cumulants(8, 1.0), &ray, 8).unwrap();
        assert!(close(cs_ray.values()[1], 3.0, 1e-15));
        let full = free_multiply(&ca_cumulants(2, 1.0, &srrc_table(1.0, 2)).unwrap(), &identity, 2).unwrap();
        assert!(close(full.values()[1], 1.75, 1e-12));
    }

    #[test]
    fn chip_synchronous_product_has_the_short_form() {
        // μ((R_cs D)^n) = Σ_j β^{n−j} Σ_{(n−j+1)-part c} n(n−1)⋯(j+1)/f(c) Π μ(D^{c_r})
        let d = [1.3, 2.2, 4.9, 11.0, 27.0, 70.0, 190.0, 530.0];
        for &beta in &[0.25, 1.0, 2.0] {
            let prod = free_multiply(&cs_cumulants(8, beta), &MomentSequence::new("d", d.to_vec()), 8).unwrap();
            for n in 1..=8 {
                let mut short = 0.0;
                for j in 1..=n {
                    for c in profiles(n, n - j + 1).unwrap() {
                        let f = crate::nc::multiplicity_f(&c).unwrap() as f64;
                        let falling: f64 = (j + 1..=n).map(|k| k as f64).product();
                        short += beta.powi((n - j) as i32) * falling / f * c.product_of(&d);
                    }
                }
                assert!(close(prod.values()[n - 1], short, 1e-12), "n={n} beta={beta}");
                let p = PowerMomentSpec::custom(d.to_vec()).unwrap();
                assert!(close(aem_cs_faded(n, beta, &p).unwrap(), short, 1e-12));
            }
        }
    }

    #[test]
    fn growth_bound_for_srrc() {
        for &alpha in &[0.5, 1.0] {
            let w = srrc_table(alpha, 8);
            let span: f64 = 1.0 + alpha;
            for &beta in &[0.25, 1.0, 2.0] {
                for n in 1..=8 {
                    let bound = span.powi(n as i32 - 1)
                        * w.values()[n - 1]
                        * (1.0 + beta / span).powi(2 * n as i32);
                    assert!(aem_ca(n, beta, &w).unwrap() <= bound);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn transform_round_trip(c in prop::collection::vec(-1.0f64..1.0, 12)) {
            let cum = FreeCumulantSequence::new("r", c.clone());
            let m = moments_from_cumulants(&cum, 12).unwrap();
            let back = cumulants_from_moments(&m, 12).unwrap();
            for (x, y) in back.values().iter().zip(&c) {
                prop_assert!((x - y).abs() <= 1e-9, "{x} vs {y}");
            }
        }

        #[test]
        fn faded_sinc_equals_chip_synchronous(beta in 0.0f64..3.0, n in 1usize..8) {
            let sinc = WMomentTable::unit(8);
            for p in [PowerMomentSpec::unfaded(), PowerMomentSpec::rayleigh()] {
                let a = aem_ca_faded(n, beta, &sinc, &p).unwrap();
                let b = aem_cs_faded(n, beta, &p).unwrap();
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }
}
