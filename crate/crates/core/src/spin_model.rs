//! Energy shells of `N` weakly interacting spins, with the first `αN` spins
//! as the system `S` and the rest as the environment `E`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::thermalization::ConstraintSubspace;

/// Largest supported number of spins; keeps `C(N, k) ≤ 3432`.
pub const MAX_SPINS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinShellSpec {
    pub n_spins: usize,
    pub k_up: usize,
    /// `α = alpha_num / alpha_den`.
    pub alpha_num: usize,
    pub alpha_den: usize,
}

impl SpinShellSpec {
    pub fn new(n_spins: usize, k_up: usize, alpha_num: usize, alpha_den: usize) -> Result<Self> {
        let spec = Self { n_spins, k_up, alpha_num, alpha_den };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha_den == 0 {
            return Err(Error::Domain("α has a zero denominator".into()));
        }
        if self.k_up > self.n_spins {
            return Err(Error::Domain(format!("k = {} exceeds N = {}", self.k_up, self.n_spins)));
        }
        if (self.alpha_num * self.n_spins) % self.alpha_den != 0 {
            return Err(Error::Domain(format!(
                "αN = {}·{}/{} is not an integer",
                self.n_spins, self.alpha_num, self.alpha_den
            )));
        }
        let m = self.system_spins();
        if m == 0 || m >= self.n_spins {
            return Err(Error::Domain(format!("αN = {m} must lie in 1..={}", self.n_spins.saturating_sub(1))));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha_num as f64 / self.alpha_den as f64
    }

    /// `αN`.
    pub fn system_spins(&self) -> usize {
        self.alpha_num * self.n_spins / self.alpha_den
    }

    /// `|Ω_k| = C(N, k)`.
    pub fn shell_dim(&self) -> usize {
        binomial(self.n_spins, self.k_up)
    }
}

/// Parses `α` written as `"p/q"` or an integer.
pub fn parse_alpha(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::Domain(format!("cannot parse α = {text:?}; expected p/q"));
    match text.split_once('/') {
        Some((p, q)) => Ok((p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?)),
        None => Ok((text.trim().parse().map_err(|_| bad())?, 1)),
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// `h(p) = −p log p − (1−p) log(1−p)` in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

/// Shell `Ω_k` with `S` the first `αN` spins. Spin up is `|1⟩`.
pub fn energy_shell(spec: &SpinShellSpec) -> Result<ConstraintSubspace> {
    let order: Vec<usize> = (0..spec.n_spins).collect();
    energy_shell_ordered(spec, &order)
}

/// Shell `Ω_k` where spins `order[..αN]` form `S` and the rest form `E`,
/// each in the listed order.
pub fn energy_shell_ordered(spec: &SpinShellSpec, order: &[usize]) -> Result<ConstraintSubspace> {
    spec.validate()?;
    let n = spec.n_spins;
    if n > MAX_SPINS {
        return Err(Error::Dimension(format!("N = {n} exceeds the cap {MAX_SPINS}")));
    }
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
        return Err(Error::Domain(format!("{order:?} is not a permutation of 0..{n}")));
    }
    let m = spec.system_spins();
    let dim_s = 1usize << m;
    let dim_e = 1usize << (n - m);
    let one = Complex64::new(1.0, 0.0);
    // Spin i of the configuration is bit (n-1-i) of `config`; position p of the
    // reordered register holds spin order[p].
    let basis = (0..1usize << n)
        .filter(|c: &usize| c.count_ones() as usize == spec.k_up)
        .map(|config| {
            let idx = order.iter().fold(0usize, |acc, &spin| (acc << 1) | ((config >> (n - 1 - spin)) & 1));
            vec![(idx, one)]
        })
        .collect::<Vec<_>>();
    let mut basis = basis;
    basis.sort_by_key(|v| v[0].0);
    ConstraintSubspace::new(basis, dim_s, dim_e)
}

/// Leading-order thresholds in bits, logarithmic terms dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellThresholds {
    /// `N(2α − h(k/N))`: thermalization is guaranteed when `H(SE|R)` exceeds it.
    pub direct: f64,
    /// `N(1 − α)`: no evolution in the shell thermalizes when `H(SE|R)` is below minus it.
    pub converse: f64,
}

pub fn fig5_thresholds(spec: &SpinShellSpec) -> Result<ShellThresholds> {
    spec.validate()?;
    let n = spec.n_spins as f64;
    let h = binary_entropy(spec.k_up as f64 / n)?;
    Ok(ShellThresholds { direct: n * (2.0 * spec.alpha() - h), converse: n * (1.0 - spec.alpha()) })
}

/// `P(j spins of S up) = C(αN, j) C(N−αN, k−j) / C(N, k)` for `j = 0..=αN`.
pub fn hypergeometric_marginals(spec: &SpinShellSpec) -> Vec<f64> {
    let m = spec.system_spins();
    let total = spec.shell_dim() as f64;
    (0..=m)
        .map(|j| {
            if j > spec.k_up {
                0.0
            } else {
                (binomial(m, j) * binomial(spec.n_spins - m, spec.k_up - j)) as f64 / total
            }
        })
        .collect()
}
