use std::fmt;

use crate::error::{Error, Result};
use crate::nc::counting::ClassSizeProfile;

/// A partition of the ordered ground set `{1, ..., n}`.
///
/// Classes are stored sorted, and ordered by their minimum element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetPartition {
    n: usize,
    classes: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Validates and normalises `classes` into a partition of `{1..n}`.
    pub fn new(n: usize, classes: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("ground set must be non-empty"));
        }
        let mut seen = vec![false; n + 1];
        let mut classes: Vec<Vec<usize>> = classes
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        for class in &classes {
            if class.is_empty() {
                return Err(Error::invalid("empty class"));
            }
            for &x in class {
                if x == 0 || x > n {
                    return Err(Error::invalid(format!("element {x} outside 1..={n}")));
                }
                if seen[x] {
                    return Err(Error::invalid(format!("element {x} appears twice")));
                }
                seen[x] = true;
            }
        }
        if let Some(missing) = (1..=n).find(|&x| !seen[x]) {
            return Err(Error::invalid(format!("element {missing} is not covered")));
        }
        classes.sort_unstable_by_key(|c| c[0]);
        Ok(SetPartition { n, classes })
    }

    /// Builds a partition from a class label per element (`labels[i]` is the
    /// label of element `i + 1`). Labels need not be contiguous.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let mut order: Vec<usize> = Vec::new();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            match order.iter().position(|&o| o == l) {
                Some(pos) => classes[pos].push(i + 1),
                None => {
                    order.push(l);
                    classes.push(vec![i + 1]);
                }
            }
        }
        SetPartition::new(labels.len(), classes)
    }

    pub fn singletons(n: usize) -> Result<Self> {
        SetPartition::new(n, (1..=n).map(|x| vec![x]).collect())
    }

    pub fn full(n: usize) -> Result<Self> {
        SetPartition::new(n, vec![(1..=n).collect()])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Class index (0-based, in min-element order) of each element `1..=n`,
    /// stored at position `element - 1`.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.n];
        for (ci, class) in self.classes.iter().enumerate() {
            for &x in class {
                labels[x - 1] = ci;
            }
        }
        labels
    }

    pub fn profile(&self) -> ClassSizeProfile {
        ClassSizeProfile::from_unsorted(self.classes.iter().map(Vec::len).collect())
            .expect("class sizes of a valid partition form a profile")
    }

    pub fn is_noncrossing(&self) -> bool {
        is_noncrossing(self)
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, class) in self.classes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{")?;
            for (k, x) in class.iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

/// True iff no `p1 < q1 < p2 < q2` has `p1, p2` in one class and `q1, q2` in
/// another.
///
/// Single left-to-right pass: a class that reappears must be the innermost
/// class still open.
pub fn is_noncrossing(p: &SetPartition) -> bool {
    let labels = p.labels();
    let mut last = vec![0usize; p.class_count()];
    for (i, &l) in labels.iter().enumerate() {
        last[l] = i;
    }
    let mut started = vec![false; p.class_count()];
    let mut open: Vec<usize> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        if started[l] {
            if open.last() != Some(&l) {
                return false;
            }
        } else {
            started[l] = true;
            open.push(l);
        }
        if last[l] == i {
            open.pop();
        }
    }
    true
}

/// Every noncrossing partition of `{1..n}`, each exactly once.
///
/// Elements are placed left to right; each either opens a new class or joins
/// a class that is still open, closing every class opened after it. Joining
/// older classes is tried first, so the single-class partition comes first
/// and the all-singleton partition last.
pub fn enumerate_nc(n: usize) -> Result<Vec<SetPartition>> {
    let mut out = Vec::new();
    for_each_nc(n, |p| out.push(p.clone()))?;
    Ok(out)
}

/// Visits every noncrossing partition of `{1..n}` in the order of
/// [`enumerate_nc`] without collecting them.
pub fn for_each_nc<F: FnMut(&SetPartition)>(n: usize, mut visit: F) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("enumerate_nc requires n >= 1"));
    }
    let mut labels = Vec::with_capacity(n);
    let mut open = Vec::new();
    let mut next_label = 0;
    nc_step(n, &mut labels, &mut open, &mut next_label, &mut visit);
    Ok(())
}

fn nc_step<F: FnMut(&SetPartition)>(
    n: usize,
    labels: &mut Vec<usize>,
    open: &mut Vec<usize>,
    next_label: &mut usize,
    visit: &mut F,
) {
    if labels.len() == n {
        let p = SetPartition::from_labels(labels).expect("generated labels are a partition");
        visit(&p);
        return;
    }
    for depth in 0..open.len() {
        let saved: Vec<usize> = open.drain(depth + 1..).collect();
        labels.push(open[depth]);
        nc_step(n, labels, open, next_label, visit);
        labels.pop();
        open.extend(saved);
    }
    let label = *next_label;
    *next_label += 1;
    open.push(label);
    labels.push(label);
    nc_step(n, labels, open, next_label, visit);
    labels.pop();
    open.pop();
    *next_label -= 1;
}

/// Kreweras complement of a noncrossing partition.
///
/// Reading each class as a cycle (increasing order) of a permutation `P`,
/// the complement is the cycle partition of `P^{-1} γ` with `γ = (1 2 ... n)`.
/// The barred copy `k̄` of the interlaced set is re-indexed to `k`.
pub fn kreweras(p: &SetPartition) -> Result<SetPartition> {
    if !p.is_noncrossing() {
        return Err(Error::CrossingPartition(p.to_string()));
    }
    let n = p.n();
    // prev[y] = predecessor of y inside its class, cyclically (0-based)
    let mut prev = vec![0usize; n];
    for class in p.classes() {
        for (i, &x) in class.iter().enumerate() {
            let y = class[(i + 1) % class.len()];
            prev[y - 1] = x - 1;
        }
    }
    let mut visited = vec![false; n];
    let mut classes = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut x = start;
        while !visited[x] {
            visited[x] = true;
            cycle.push(x + 1);
            x = prev[(x + 1) % n];
        }
        classes.push(cycle);
    }
    SetPartition::new(n, classes)
}
