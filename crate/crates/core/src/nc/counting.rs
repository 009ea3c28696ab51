use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unordered class sizes of a partition, stored non-ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassSizeProfile {
    sizes: Vec<usize>,
}

impl ClassSizeProfile {
    /// Accepts only a non-empty, non-ascending list of positive sizes.
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::invalid("profile must have at least one part"));
        }
        if sizes.contains(&0) {
            return Err(Error::invalid("profile parts must be positive"));
        }
        if sizes.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid(format!("profile {sizes:?} is not non-ascending")));
        }
        Ok(ClassSizeProfile { sizes })
    }

    pub fn from_unsorted(mut sizes: Vec<usize>) -> Result<Self> {
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        ClassSizeProfile::new(sizes)
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn parts(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Product over the parts of `table[size - 1]`.
    pub fn product_of(&self, table: &[f64]) -> f64 {
        self.sizes.iter().map(|&s| table[s - 1]).product()
    }
}

impl fmt::Display for ClassSizeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.sizes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

fn factorial(n: usize) -> Result<u128> {
    (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k).ok_or(Error::Overflow("factorial")))
}

/// `hi * (hi - 1) * ... * lo`, or 1 when `lo > hi`.
fn falling(hi: usize, lo: usize) -> Result<u128> {
    (lo..=hi)
        .map(|k| k as u128)
        .try_fold(1u128, |acc, k| acc.checked_mul(k).ok_or(Error::Overflow("falling product")))
}

pub fn binomial(n: usize, k: usize) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or(Error::Overflow("binomial"))?
            / (i as u128 + 1);
    }
    Ok(acc)
}

pub fn catalan(n: usize) -> Result<u128> {
    Ok(binomial(2 * n, n)? / (n as u128 + 1))
}

/// Number of noncrossing partitions of an `n`-set with exactly `j` classes.
pub fn narayana(n: usize, j: usize) -> Result<u128> {
    if n == 0 || j == 0 || j > n {
        return Err(Error::invalid(format!("narayana({n}, {j}) needs 1 <= j <= n")));
    }
    let prod = binomial(n, j)?
        .checked_mul(binomial(n, j - 1)?)
        .ok_or(Error::Overflow("narayana"))?;
    Ok(prod / n as u128)
}

/// `∏ n_k!` where `n_k` counts the parts equal to `k`.
pub fn multiplicity_f(profile: &ClassSizeProfile) -> Result<u128> {
    let mut acc: u128 = 1;
    let sizes = profile.sizes();
    let mut i = 0;
    while i < sizes.len() {
        let run = sizes[i..].iter().take_while(|&&s| s == sizes[i]).count();
        acc = acc
            .checked_mul(factorial(run)?)
            .ok_or(Error::Overflow("multiplicity"))?;
        i += run;
    }
    Ok(acc)
}

/// Number of noncrossing partitions of `{1..n}` with the given class sizes:
/// `n (n-1) ... (n-j+2) / f`.
pub fn count_by_profile(profile: &ClassSizeProfile) -> Result<u128> {
    let n = profile.n();
    let j = profile.parts();
    Ok(falling(n, n + 2 - j)? / multiplicity_f(profile)?)
}

/// Number of noncrossing partitions with class sizes `pi` whose Kreweras
/// complement has class sizes `kc`: `n (n-j)! (j-1)! / (f(pi) f(kc))`.
pub fn count_by_profile_pair(pi: &ClassSizeProfile, kc: &ClassSizeProfile) -> Result<u128> {
    let n = pi.n();
    if kc.n() != n {
        return Err(Error::invalid(format!("profiles {pi} and {kc} have different totals")));
    }
    let j = pi.parts();
    if j + kc.parts() != n + 1 {
        return Err(Error::invalid(format!(
            "profiles {pi} and {kc} cannot be a partition and its complement"
        )));
    }
    let num = (n as u128)
        .checked_mul(factorial(n - j)?)
        .and_then(|v| v.checked_mul(factorial(j - 1).ok()?))
        .ok_or(Error::Overflow("profile pair count"))?;
    let den = multiplicity_f(pi)?
        .checked_mul(multiplicity_f(kc)?)
        .ok_or(Error::Overflow("profile pair count"))?;
    Ok(num / den)
}

/// All non-ascending `parts`-tuples of positive integers summing to `n`, in
/// descending lexicographic order.
pub fn profiles(n: usize, parts: usize) -> Result<Vec<ClassSizeProfile>> {
    if n == 0 || parts == 0 || parts > n {
        return Err(Error::invalid(format!("profiles({n}, {parts}) needs 1 <= parts <= n")));
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(parts);
    fill_profiles(n, parts, n, &mut cur, &mut out);
    Ok(out)
}

fn fill_profiles(
    remaining: usize,
    parts_left: usize,
    cap: usize,
    cur: &mut Vec<usize>,
    out: &mut Vec<ClassSizeProfile>,
) {
    if parts_left == 0 {
        if remaining == 0 {
            out.push(ClassSizeProfile { sizes: cur.clone() });
        }
        return;
    }
    let hi = cap.min(remaining + 1 - parts_left);
    let lo = remaining.div_ceil(parts_left);
    for s in (lo..=hi).rev() {
        cur.push(s);
        fill_profiles(remaining - s, parts_left - 1, s, cur, out);
        cur.pop();
    }
}
