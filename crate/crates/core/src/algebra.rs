//! Weighted Wiener-algebra sequences and the space-time coefficient space.
//!
//! `ModeSequence` holds spatial Fourier data a_n indexed over N^d with the
//! weighted l^1 norm sum (1+|n|)^s |a_n|. `SpaceTimeSequence` holds space-time
//! coefficients c_{n,j} supported on the band 1 <= n, n <= j <= n^2
//! (componentwise); the band is enforced on every insertion.
//!
//! Storage: for d = 1 shells are dense arrays indexed by the offset j - n in
//! [0, n^2 - n], which keeps the convolutions cache friendly; for d >= 2 a
//! sorted map is used. Zero entries are dropped on read, so equality means
//! equal supports after dropping exact zeros. All iteration orders are fixed
//! (ascending shell, then ascending offset / lexicographic), so reductions
//! are reproducible bit for bit.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lattice::{FrequencyVector, MultiIndex};
use crate::scalar::Scalar;

/// Finitely supported element of l^1_{s,d}: spatial Fourier data.
#[derive(Debug, Clone)]
pub struct ModeSequence<S> {
    d: usize,
    weight_s: f64,
    entries: BTreeMap<MultiIndex, S>,
}

impl<S: Scalar> ModeSequence<S> {
    pub fn new(d: usize, weight_s: f64) -> Self {
        Self {
            d,
            weight_s,
            entries: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn weight_exponent(&self) -> f64 {
        self.weight_s
    }

    pub fn insert(&mut self, n: MultiIndex, value: S) -> Result<()> {
        if n.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: n.dim(),
            });
        }
        if value.is_zero() {
            self.entries.remove(&n);
        } else {
            self.entries.insert(n, value);
        }
        Ok(())
    }

    pub fn get(&self, n: &MultiIndex) -> Option<&S> {
        self.entries.get(n).filter(|v| !v.is_zero())
    }

    pub fn is_empty(&self) -> bool {
        self.entries.values().all(|v| v.is_zero())
    }

    pub fn support_len(&self) -> usize {
        self.entries.values().filter(|v| !v.is_zero()).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &S)> {
        self.entries.iter().filter(|(_, v)| !v.is_zero())
    }

    /// True when every nonzero entry has all components >= 1.
    pub fn strictly_positive_support(&self) -> bool {
        self.iter().all(|(n, _)| n.entries().iter().all(|&e| e >= 1))
    }

    /// sum (1+|n|)^s |a_n|.
    pub fn norm(&self) -> f64 {
        self.iter()
            .map(|(n, v)| weight_factor(n.order(), self.weight_s) * v.abs_upper())
            .sum()
    }

    /// Cauchy product (a*b)_n = sum_{n1+n2=n} a_{n1} b_{n2}.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: other.d,
            });
        }
        let mut out = Self::new(self.d, self.weight_s);
        for (n1, v1) in self.iter() {
            for (n2, v2) in other.iter() {
                let n = n1.add(n2)?;
                let t = v1.mul(v2);
                let cur = out.entries.remove(&n).unwrap_or_else(S::zero);
                out.entries.insert(n, cur.add(&t));
            }
        }
        out.prune();
        Ok(out)
    }

    fn prune(&mut self) {
        self.entries.retain(|_, v| !v.is_zero());
    }
}

impl<S: Scalar> PartialEq for ModeSequence<S> {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.iter().eq(other.iter())
    }
}

#[inline]
pub(crate) fn weight_factor(order: i64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        (1.0 + order as f64).powf(s)
    }
}

/// Shell layout helper for d = 1: shell n holds offsets j - n in [0, n^2 - n].
#[inline]
pub(crate) fn shell_len(n: u64) -> usize {
    (n * n - n + 1) as usize
}

#[derive(Debug, Clone)]
enum Store<S> {
    /// shells[k] is shell n = k+1; an empty vec denotes an all-zero shell.
    Dense1(Vec<Vec<S>>),
    Sparse(BTreeMap<(MultiIndex, MultiIndex), S>),
}

/// Finitely supported element of the space-time coefficient space X.
#[derive(Debug, Clone)]
pub struct SpaceTimeSequence<S> {
    d: usize,
    weight_s: f64,
    omega: FrequencyVector,
    store: Store<S>,
}

impl<S: Scalar> SpaceTimeSequence<S> {
    pub fn new(d: usize, weight_s: f64, omega: FrequencyVector) -> Result<Self> {
        if omega.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: omega.dim(),
            });
        }
        let store = if d == 1 {
            Store::Dense1(Vec::new())
        } else {
            Store::Sparse(BTreeMap::new())
        };
        Ok(Self {
            d,
            weight_s,
            omega,
            store,
        })
    }

    pub(crate) fn from_dense_shells(
        weight_s: f64,
        omega: FrequencyVector,
        shells: Vec<Vec<S>>,
    ) -> Self {
        debug_assert_eq!(omega.dim(), 1);
        for (k, sh) in shells.iter().enumerate() {
            debug_assert!(sh.is_empty() || sh.len() == shell_len(k as u64 + 1));
        }
        Self {
            d: 1,
            weight_s,
            omega,
            store: Store::Dense1(shells),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn weight_exponent(&self) -> f64 {
        self.weight_s
    }

    pub fn omega(&self) -> &FrequencyVector {
        &self.omega
    }

    /// Validates the support band and stores the value (zeros are dropped).
    pub fn insert(&mut self, n: MultiIndex, j: MultiIndex, value: S) -> Result<()> {
        if n.dim() != self.d || j.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: n.dim().min(j.dim()),
            });
        }
        let ones = MultiIndex::ones(self.d);
        let nsq = n.elementwise_square();
        if !ones.le(&n)? || !n.le(&j)? || !j.le(&nsq)? {
            return Err(Error::BandViolation {
                n: n.entries().to_vec(),
                j: j.entries().to_vec(),
            });
        }
        match &mut self.store {
            Store::Dense1(shells) => {
                let nn = n.entries()[0] as u64;
                let off = (j.entries()[0] - n.entries()[0]) as usize;
                let idx = (nn - 1) as usize;
                if shells.len() <= idx {
                    shells.resize(idx + 1, Vec::new());
                }
                if shells[idx].is_empty() {
                    if value.is_zero() {
                        return Ok(());
                    }
                    shells[idx] = vec![S::zero(); shell_len(nn)];
                }
                shells[idx][off] = value;
            }
            Store::Sparse(map) => {
                if value.is_zero() {
                    map.remove(&(n, j));
                } else {
                    map.insert((n, j), value);
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, n: &MultiIndex, j: &MultiIndex) -> Option<&S> {
        match &self.store {
            Store::Dense1(shells) => {
                let nn = n.entries().first()?;
                let jj = j.entries().first()?;
                let idx = (*nn as usize).checked_sub(1)?;
                let sh = shells.get(idx)?;
                if sh.is_empty() {
                    return None;
                }
                let off = usize::try_from(jj - nn).ok()?;
                sh.get(off).filter(|v| !v.is_zero())
            }
            Store::Sparse(map) => map.get(&(n.clone(), j.clone())).filter(|v| !v.is_zero()),
        }
    }

    /// Largest stored shell order (d=1: max n; d>=2: max |n|). Zero when empty.
    pub fn max_order(&self) -> i64 {
        match &self.store {
            Store::Dense1(shells) => shells
                .iter()
                .enumerate()
                .filter(|(_, sh)| sh.iter().any(|v| !v.is_zero()))
                .map(|(k, _)| k as i64 + 1)
                .max()
                .unwrap_or(0),
            Store::Sparse(map) => map
                .iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|((n, _), _)| n.order())
                .max()
                .unwrap_or(0),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.support_len() == 0
    }

    pub fn support_len(&self) -> usize {
        let mut count = 0;
        self.for_each(|_, _, _| count += 1);
        count
    }

    /// Visits all nonzero entries in ascending (n, j) order.
    pub fn for_each<F: FnMut(&MultiIndex, &MultiIndex, &S)>(&self, mut f: F) {
        match &self.store {
            Store::Dense1(shells) => {
                for (k, sh) in shells.iter().enumerate() {
                    let n = k as i64 + 1;
                    for (off, v) in sh.iter().enumerate() {
                        if !v.is_zero() {
                            let ni = MultiIndex::scalar(n as u64);
                            let ji = MultiIndex::scalar((n + off as i64) as u64);
                            f(&ni, &ji, v);
                        }
                    }
                }
            }
            Store::Sparse(map) => {
                for ((n, j), v) in map.iter() {
                    if !v.is_zero() {
                        f(n, j, v);
                    }
                }
            }
        }
    }

    /// Nonzero entries as owned tuples, ascending (n, j).
    pub fn entries(&self) -> Vec<(MultiIndex, MultiIndex, S)> {
        let mut out = Vec::new();
        self.for_each(|n, j, v| out.push((n.clone(), j.clone(), v.clone())));
        out
    }

    /// Dense view of shell n for d = 1 (offset j - n); None when absent.
    pub(crate) fn shell_dense(&self, n: u64) -> Option<&[S]> {
        if n == 0 {
            return None;
        }
        match &self.store {
            Store::Dense1(shells) => {
                let sh = shells.get((n - 1) as usize)?;
                if sh.is_empty() {
                    None
                } else {
                    Some(sh)
                }
            }
            Store::Sparse(_) => None,
        }
    }

    /// sum (1+|n|)^s |c_{n,j}|.
    pub fn norm(&self) -> f64 {
        let mut acc = 0.0;
        self.for_each(|n, _, v| acc += weight_factor(n.order(), self.weight_s) * v.abs_upper());
        acc
    }

    /// Row sums b_n = sum_j |c_{n,j}| for d = 1, indexed by n (index 0 unused).
    pub fn row_abs_sums(&self, n_max: u64) -> Vec<f64> {
        let mut out = vec![0.0; (n_max + 1) as usize];
        self.for_each(|n, _, v| {
            let nn = n.entries()[0] as u64;
            if nn <= n_max {
                out[nn as usize] += v.abs_upper();
            }
        });
        out
    }

    /// True when every component of every entry is finite.
    pub fn all_finite(&self) -> bool {
        let mut ok = true;
        self.for_each(|_, _, v| ok &= v.is_finite());
        ok
    }

    pub fn scale(&self, factor: &S) -> Self {
        self.map_values(|v| factor.mul(v))
    }

    pub fn map_values<F: Fn(&S) -> S>(&self, f: F) -> Self {
        let mut out = self.clone();
        match &mut out.store {
            Store::Dense1(shells) => {
                for sh in shells.iter_mut() {
                    for v in sh.iter_mut() {
                        if !v.is_zero() {
                            *v = f(v);
                        }
                    }
                }
            }
            Store::Sparse(map) => {
                for v in map.values_mut() {
                    *v = f(v);
                }
                map.retain(|_, v| !v.is_zero());
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.sub(b))
    }

    fn zip_with<F: Fn(&S, &S) -> S>(&self, other: &Self, f: F) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        match (&mut out.store, &other.store) {
            (Store::Dense1(a), Store::Dense1(b)) => {
                if a.len() < b.len() {
                    a.resize(b.len(), Vec::new());
                }
                for (k, bs) in b.iter().enumerate() {
                    if bs.is_empty() {
                        continue;
                    }
                    if a[k].is_empty() {
                        a[k] = vec![S::zero(); bs.len()];
                    }
                    for (av, bv) in a[k].iter_mut().zip(bs) {
                        *av = f(av, bv);
                    }
                }
                // entries present in self but absent in other still need f(x, 0)
                for (k, as_) in a.iter_mut().enumerate() {
                    let b_empty = b.get(k).map(|s| s.is_empty()).unwrap_or(true);
                    if b_empty && !as_.is_empty() {
                        let z = S::zero();
                        for av in as_.iter_mut() {
                            if !av.is_zero() {
                                *av = f(av, &z);
                            }
                        }
                    }
                }
            }
            (Store::Sparse(a), Store::Sparse(b)) => {
                for (key, bv) in b.iter() {
                    let cur = a.remove(key).unwrap_or_else(S::zero);
                    let nv = f(&cur, bv);
                    if !nv.is_zero() {
                        a.insert(key.clone(), nv);
                    }
                }
                a.retain(|_, v| !v.is_zero());
            }
            _ => unreachable!("storage kind is determined by d"),
        }
        Ok(out)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: other.d,
            });
        }
        if self.omega != other.omega {
            return Err(Error::Invalid(
                "space-time sequences have different frequency vectors".into(),
            ));
        }
        Ok(())
    }

    /// Cauchy product over both indices. Support closure into the band is
    /// guaranteed for factors in X.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        match (&self.store, &other.store) {
            (Store::Dense1(a), Store::Dense1(b)) => {
                let na = a.len() as u64;
                let nb = b.len() as u64;
                if na == 0 || nb == 0 {
                    return Self::new(self.d, self.weight_s, self.omega.clone());
                }
                let n_out = na + nb;
                let mut shells: Vec<Vec<S>> = vec![Vec::new(); n_out as usize];
                for n in 2..=n_out {
                    let mut acc = vec![S::zero(); shell_len(n)];
                    let mut touched = false;
                    let lo = n.saturating_sub(nb).max(1);
                    let hi = (n - 1).min(na);
                    for n1 in lo..=hi {
                        let n2 = n - n1;
                        if let (Some(sa), Some(sb)) = (self.shell_dense(n1), other.shell_dense(n2)) {
                            conv_shells_into(sa, sb, &mut acc);
                            touched = true;
                        }
                    }
                    if touched && acc.iter().any(|v| !v.is_zero()) {
                        shells[(n - 1) as usize] = acc;
                    }
                }
                Ok(Self::from_dense_shells(
                    self.weight_s,
                    self.omega.clone(),
                    shells,
                ))
            }
            (Store::Sparse(a), Store::Sparse(b)) => {
                let mut map: BTreeMap<(MultiIndex, MultiIndex), S> = BTreeMap::new();
                for ((n1, j1), v1) in a.iter().filter(|(_, v)| !v.is_zero()) {
                    for ((n2, j2), v2) in b.iter().filter(|(_, v)| !v.is_zero()) {
                        let n = n1.add(n2)?;
                        let j = j1.add(j2)?;
                        let t = v1.mul(v2);
                        let key = (n, j);
                        let cur = map.remove(&key).unwrap_or_else(S::zero);
                        map.insert(key, cur.add(&t));
                    }
                }
                map.retain(|_, v| !v.is_zero());
                Ok(Self {
                    d: self.d,
                    weight_s: self.weight_s,
                    omega: self.omega.clone(),
                    store: Store::Sparse(map),
                })
            }
            _ => unreachable!("storage kind is determined by d"),
        }
    }

    /// p-fold Cauchy power, p >= 2.
    pub fn power(&self, p: u32) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidPower(p));
        }
        let mut acc = self.product(self)?;
        for _ in 2..p {
            acc = acc.product(self)?;
        }
        Ok(acc)
    }
}

impl<S: Scalar> PartialEq for SpaceTimeSequence<S> {
    fn eq(&self, other: &Self) -> bool {
        if self.d != other.d || self.omega != other.omega {
            return false;
        }
        self.entries()
            .into_iter()
            .eq(other.entries())
    }
}

/// Dense shell convolution: offsets add, zero factors are skipped, and the
/// accumulation order (ascending o1, then o2) is fixed.
pub(crate) fn conv_shells_into<S: Scalar>(a: &[S], b: &[S], acc: &mut [S]) {
    for (o1, v1) in a.iter().enumerate() {
        if v1.is_zero() {
            continue;
        }
        for (o2, v2) in b.iter().enumerate() {
            if v2.is_zero() {
                continue;
            }
            let t = v1.mul(v2);
            acc[o1 + o2] = acc[o1 + o2].add(&t);
        }
    }
}
