//! Monomial expansions of Jack polynomials in `q` variables, built degree by degree
//! from the horizontal-strip branching rule and cached per `(q, α)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use statrs::function::gamma::ln_gamma;

use super::partition::{partitions, Partition};

/// All partitions of one degree together with the coefficients
/// P_λ = Σ_κ p(λ, κ) m_κ and the log of the factor u_λ with C_λ = u_λ P_λ.
pub(crate) struct JackLayer {
    pub parts: Vec<Partition>,
    index: HashMap<Partition, usize>,
    p: Vec<f64>,
    pub ln_u: Vec<f64>,
}

impl JackLayer {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn index_of(&self, lam: &Partition) -> Option<usize> {
        self.index.get(lam).copied()
    }

    /// p(λ, κ) by layer indices.
    pub fn p(&self, lam: usize, kappa: usize) -> f64 {
        self.p[lam * self.parts.len() + kappa]
    }

    /// Ĉ(λ, κ) = u_λ p(λ, κ).
    #[cfg(test)]
    pub fn c(&self, lam: usize, kappa: usize) -> f64 {
        let p = self.p(lam, kappa);
        if p == 0.0 {
            0.0
        } else {
            p * self.ln_u[lam].exp()
        }
    }
}

pub(crate) struct JackTable {
    q: usize,
    alpha: f64,
    layers: Vec<JackLayer>,
}

struct Strip {
    size: u32,
    mu_len: usize,
    mu_index: usize,
    psi: f64,
}

/// Upper hook h*(s) = l(s) + α(a(s) + 1) at zero-based cell (i, j).
fn upper_hook(lam: &Partition, i: usize, j: u32, alpha: f64) -> f64 {
    let leg = lam.column(j) as f64 - i as f64 - 1.0;
    let arm = lam.part(i) as f64 - j as f64 - 1.0;
    leg + alpha * (arm + 1.0)
}

/// Lower hook h_*(s) = l(s) + 1 + α a(s).
fn lower_hook(lam: &Partition, i: usize, j: u32, alpha: f64) -> f64 {
    let leg = lam.column(j) as f64 - i as f64 - 1.0;
    let arm = lam.part(i) as f64 - j as f64 - 1.0;
    leg + 1.0 + alpha * arm
}

/// Branching coefficient ψ_{λ/μ} for a horizontal strip λ/μ.
fn psi(lam: &Partition, mu: &Partition, alpha: f64) -> f64 {
    let mut out = 1.0;
    for j in 0..lam.part(0) {
        let col = lam.column(j);
        if col != mu.column(j) {
            continue;
        }
        for i in 0..col as usize {
            out *= upper_hook(lam, i, j, alpha) / lower_hook(lam, i, j, alpha);
            out *= lower_hook(mu, i, j, alpha) / upper_hook(mu, i, j, alpha);
        }
    }
    out
}

/// ln(α^k k! / ∏_s h*_λ(s)).
fn ln_c_factor(lam: &Partition, alpha: f64) -> f64 {
    let k = lam.weight();
    let mut out = k as f64 * alpha.ln() + ln_gamma(k as f64 + 1.0);
    for (i, &part) in lam.parts().iter().enumerate() {
        for j in 0..part {
            out -= upper_hook(lam, i, j, alpha).ln();
        }
    }
    out
}

/// Partitions μ ⊂ λ with λ/μ a nonempty horizontal strip and ℓ(μ) < q.
fn strips(lam: &Partition, q: usize) -> Vec<Partition> {
    let rows = lam.len();
    let mut out = Vec::new();
    let mut cur = vec![0u32; rows];
    fn rec(lam: &Partition, q: usize, i: usize, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if i == cur.len() {
            let mut parts = cur.clone();
            while parts.last() == Some(&0) {
                parts.pop();
            }
            if parts.len() < q && parts.iter().sum::<u32>() < lam.weight() {
                out.push(Partition::from_sorted(parts));
            }
            return;
        }
        for m in lam.part(i + 1)..=lam.part(i) {
            cur[i] = m;
            rec(lam, q, i + 1, cur, out);
        }
    }
    rec(lam, q, 0, &mut cur, &mut out);
    out
}

impl JackTable {
    pub fn new(q: usize, alpha: f64) -> Self {
        let empty = Partition::empty();
        let mut index = HashMap::new();
        index.insert(empty.clone(), 0);
        let layer0 = JackLayer { parts: vec![empty], index, p: vec![1.0], ln_u: vec![0.0] };
        JackTable { q, alpha, layers: vec![layer0] }
    }

    pub fn degree(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn layer(&self, k: usize) -> &JackLayer {
        &self.layers[k]
    }

    pub fn ensure(&mut self, k: usize) {
        while self.degree() < k {
            self.push_layer();
        }
    }

    fn push_layer(&mut self) {
        let k = self.layers.len() as u32;
        let parts = partitions(k, self.q);
        let n = parts.len();
        let index: HashMap<Partition, usize> =
            parts.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();

        // κ grouped by last part: (κ index, index of κ without its last part, ℓ(κ)).
        let mut by_last: HashMap<u32, Vec<(usize, usize, usize)>> = HashMap::new();
        for (b, kappa) in parts.iter().enumerate() {
            let m = kappa.len();
            let last = kappa.part(m - 1);
            let head = Partition::from_sorted(kappa.parts()[..m - 1].to_vec());
            let prev = &self.layers[(k - last) as usize];
            let head_idx = prev.index_of(&head).expect("lower layer holds all partitions");
            by_last.entry(last).or_default().push((b, head_idx, m));
        }

        let mut p = vec![0.0; n * n];
        for (a, lam) in parts.iter().enumerate() {
            let strip_list: Vec<Strip> = strips(lam, self.q)
                .into_iter()
                .map(|mu| {
                    let size = k - mu.weight();
                    let prev = &self.layers[mu.weight() as usize];
                    Strip {
                        size,
                        mu_len: mu.len(),
                        mu_index: prev.index_of(&mu).expect("strip base is a partition"),
                        psi: psi(lam, &mu, self.alpha),
                    }
                })
                .collect();
            let row = &mut p[a * n..(a + 1) * n];
            for s in &strip_list {
                let Some(targets) = by_last.get(&s.size) else { continue };
                let prev = &self.layers[(k - s.size) as usize];
                for &(b, head_idx, m) in targets {
                    if s.mu_len < m {
                        row[b] += s.psi * prev.p(s.mu_index, head_idx);
                    }
                }
            }
        }
        let ln_u = parts.iter().map(|lam| ln_c_factor(lam, self.alpha)).collect();
        self.layers.push(JackLayer { parts, index, p, ln_u });
    }
}

type SharedTable = Arc<RwLock<JackTable>>;

fn shared(q: usize, alpha: f64) -> SharedTable {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), SharedTable>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry((q, alpha.to_bits()))
        .or_insert_with(|| Arc::new(RwLock::new(JackTable::new(q, alpha))))
        .clone()
}

/// Run `f` on the cached table for `(q, α)` holding at least degrees `0..=k`.
pub(crate) fn with_table<R>(q: usize, alpha: f64, k: usize, f: impl FnOnce(&JackTable) -> R) -> R {
    let table = shared(q, alpha);
    {
        let guard = table.read().unwrap_or_else(|e| e.into_inner());
        if guard.degree() >= k {
            return f(&guard);
        }
    }
    let mut guard = table.write().unwrap_or_else(|e| e.into_inner());
    guard.ensure(k);
    f(&guard)
}

/// Exponent vectors of the distinct permutations of κ padded with zeros to length `q`.
pub(crate) fn monomial_exponents(kappa: &Partition, q: usize) -> Vec<Vec<u32>> {
    let mut v: Vec<u32> = (0..q).map(|i| kappa.part(i)).collect();
    v.sort_unstable();
    let mut out = vec![v.clone()];
    while next_permutation(&mut v) {
        out.push(v.clone());
    }
    out
}

fn next_permutation(v: &mut [u32]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Monomial symmetric polynomial m_κ(x); zero when κ has more parts than variables.
pub fn monomial(kappa: &Partition, x: &[f64]) -> f64 {
    if kappa.len() > x.len() {
        return 0.0;
    }
    monomial_exponents(kappa, x.len())
        .iter()
        .map(|e| e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(p: &[u32]) -> Partition {
        Partition::new(p.to_vec()).unwrap()
    }

    #[test]
    fn diagonal_coefficients_are_one() {
        for alpha in [0.5, 1.0, 2.0] {
            let mut t = JackTable::new(3, alpha);
            t.ensure(7);
            for k in 0..=7 {
                let layer = t.layer(k);
                for a in 0..layer.len() {
                    assert!((layer.p(a, a) - 1.0).abs() < 1e-13);
                    // Triangular: κ lexicographically larger than λ never appears.
                    for b in 0..a {
                        assert_eq!(layer.p(a, b), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn degree_two_known_expansion() {
        let alpha = 0.7;
        let mut t = JackTable::new(2, alpha);
        t.ensure(2);
        let layer = t.layer(2);
        let (i2, i11) = (layer.index_of(&part(&[2])).unwrap(), layer.index_of(&part(&[1, 1])).unwrap());
        assert!((layer.c(i2, i2) - 1.0).abs() < 1e-14);
        assert!((layer.c(i2, i11) - 2.0 / (1.0 + alpha)).abs() < 1e-14);
        assert!((layer.c(i11, i11) - 2.0 * alpha / (1.0 + alpha)).abs() < 1e-14);
    }

    #[test]
    fn permutations_are_distinct() {
        assert_eq!(monomial_exponents(&part(&[2, 1]), 3).len(), 6);
        assert_eq!(monomial_exponents(&part(&[1, 1]), 3).len(), 3);
        assert_eq!(monomial_exponents(&part(&[]), 3).len(), 1);
        assert!((monomial(&part(&[1, 1]), &[1.0, 2.0, 3.0]) - 11.0).abs() < 1e-14);
        assert_eq!(monomial(&part(&[1, 1, 1]), &[1.0, 2.0]), 0.0);
    }
}
