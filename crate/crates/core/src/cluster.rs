//! One-dimensional Gaussian mixture clustering.
//!
//! Mixtures with `K = 1..=k_max` components (unequal variances) are fitted
//! by EM from quantile starts and the model with the lowest BIC wins.
//! Components whose means climb to the same mode of the fitted density
//! are then merged, since a skewed or heavy-tailed class is often described
//! by several overlapping Gaussians.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::geometry::modone;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterConfig {
    pub k_max: usize,
    pub max_iter: usize,
    pub tol: f64,
    /// Variance floor as a fraction of the sample standard deviation.
    pub rel_sd_floor: f64,
    /// Merge components that share a density mode.
    pub merge_modes: bool,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            k_max: 12,
            max_iter: 500,
            tol: 1e-10,
            rel_sd_floor: 1e-3,
            merge_modes: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GmmFit {
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub log_likelihood: f64,
    pub bic: f64,
}

impl GmmFit {
    pub fn k(&self) -> usize {
        self.means.len()
    }

    fn log_component(&self, j: usize, x: f64) -> f64 {
        self.log_component_noisy(j, x, 0.0)
    }

    fn log_component_noisy(&self, j: usize, x: f64, sd: f64) -> f64 {
        let v = self.variances[j] + sd * sd;
        self.weights[j].ln() - 0.5 * ((TAU * v).ln() + (x - self.means[j]).powi(2) / v)
    }

    /// Index of the component with the highest posterior; ties go to the
    /// lower mean.
    pub fn assign(&self, x: f64) -> usize {
        self.assign_with_noise(x, 0.0)
    }

    /// [`Self::assign`] for a value observed with standard deviation `sd`.
    pub fn assign_with_noise(&self, x: f64, sd: f64) -> usize {
        let mut best = 0;
        let mut best_l = f64::NEG_INFINITY;
        for j in 0..self.k() {
            let l = self.log_component_noisy(j, x, sd);
            if l > best_l || (l == best_l && self.means[j] < self.means[best]) {
                best = j;
                best_l = l;
            }
        }
        best
    }

    pub fn density(&self, x: f64) -> f64 {
        (0..self.k()).map(|j| self.log_component(j, x).exp()).sum()
    }

    /// Fixed-point iteration to the mode of the mixture density reached
    /// from `x`.
    pub fn climb(&self, mut x: f64) -> f64 {
        for _ in 0..1000 {
            let (mut num, mut den) = (0.0, 0.0);
            let lc: Vec<f64> = (0..self.k()).map(|j| self.log_component(j, x)).collect();
            let top = lc.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for j in 0..self.k() {
                let w = (lc[j] - top).exp() / self.variances[j];
                num += w * self.means[j];
                den += w;
            }
            let nx = num / den;
            if (nx - x).abs() <= 1e-12 * (1.0 + x.abs()) {
                return nx;
            }
            x = nx;
        }
        x
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - f) + sorted[i + 1] * f
    } else {
        sorted[i]
    }
}

/// EM fit of a `k`-component mixture to `values`.
pub fn fit_gmm(values: &[f64], k: usize, cfg: &ClusterConfig) -> GmmFit {
    fit_gmm_noisy(values, &[], k, cfg)
}

/// EM fit of a `k`-component mixture to values observed with known
/// per-value standard deviations `noise` (empty for none). The fitted
/// variances describe the spread of the underlying values, so imprecise
/// points widen their own likelihood instead of pulling in a component.
pub fn fit_gmm_noisy(values: &[f64], noise: &[f64], k: usize, cfg: &ClusterConfig) -> GmmFit {
    let n = values.len();
    let nf = n as f64;
    let s2 = |i: usize| noise.get(i).map_or(0.0, |s| s * s);
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = values.iter().sum::<f64>() / nf;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
    let floor = (cfg.rel_sd_floor.powi(2) * var).max(1e-24 * (1.0 + mean * mean));

    let mut means: Vec<f64> = (0..k).map(|j| quantile(&sorted, (j as f64 + 0.5) / k as f64)).collect();
    let mut variances = vec![(var / (k * k) as f64).max(floor); k];
    let mut weights = vec![1.0 / k as f64; k];
    let mut resp = vec![0.0; n * k];
    let mut ll_old = f64::NEG_INFINITY;
    let mut ll = f64::NEG_INFINITY;
    let mut lc = vec![0.0; k];
    for _ in 0..cfg.max_iter {
        // E step
        ll = 0.0;
        for (i, &x) in values.iter().enumerate() {
            for j in 0..k {
                let t = variances[j] + s2(i);
                lc[j] = weights[j].ln() - 0.5 * ((TAU * t).ln() + (x - means[j]).powi(2) / t);
            }
            let z = log_sum_exp(&lc);
            ll += z;
            for j in 0..k {
                resp[i * k + j] = (lc[j] - z).exp();
            }
        }
        // M step; with noise, each point enters through its posterior
        // mean b and variance B given the component
        for j in 0..k {
            let nj: f64 = (0..n).map(|i| resp[i * k + j]).sum();
            if nj < 1e-12 {
                // dead component: park it on its old mean with zero weight
                weights[j] = 1e-300;
                continue;
            }
            let (mu, vj) = (means[j], variances[j]);
            let post = |i: usize| {
                let t = vj + s2(i);
                (mu + vj / t * (values[i] - mu), vj - vj * vj / t)
            };
            let mj = (0..n).map(|i| resp[i * k + j] * post(i).0).sum::<f64>() / nj;
            let v = (0..n)
                .map(|i| {
                    let (b, bb) = post(i);
                    resp[i * k + j] * ((b - mj).powi(2) + bb)
                })
                .sum::<f64>()
                / nj;
            weights[j] = nj / nf;
            means[j] = mj;
            variances[j] = v.max(floor);
        }
        if (ll - ll_old).abs() <= cfg.tol * (1.0 + ll.abs()) {
            break;
        }
        ll_old = ll;
    }
    let p = (3 * k - 1) as f64;
    GmmFit {
        weights,
        means,
        variances,
        log_likelihood: ll,
        bic: -2.0 * ll + p * nf.ln(),
    }
}

/// Result of clustering: classes are numbered by increasing mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub labels: Vec<usize>,
    /// Member mean of each class.
    pub means: Vec<f64>,
    pub sizes: Vec<usize>,
    /// Number of mixture components chosen by BIC, before merging.
    pub components: usize,
}

impl Clustering {
    pub fn k(&self) -> usize {
        self.means.len()
    }

    pub fn members(&self, class: usize) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(move |(_, &l)| l == class)
            .map(|(i, _)| i)
    }
}

/// Best mixture by BIC.
pub fn select_gmm(values: &[f64], cfg: &ClusterConfig) -> Option<GmmFit> {
    select_gmm_noisy(values, &[], cfg)
}

pub fn select_gmm_noisy(values: &[f64], noise: &[f64], cfg: &ClusterConfig) -> Option<GmmFit> {
    if values.is_empty() {
        return None;
    }
    let mut distinct = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let k_max = cfg.k_max.min(distinct.len()).max(1);
    (1..=k_max)
        .map(|k| fit_gmm_noisy(values, noise, k, cfg))
        .min_by(|a, b| a.bic.total_cmp(&b.bic))
}

pub fn cluster_1d(values: &[f64], cfg: &ClusterConfig) -> Clustering {
    cluster_1d_noisy(values, &[], cfg)
}

/// [`cluster_1d`] for values with known standard deviations `noise`.
pub fn cluster_1d_noisy(values: &[f64], noise: &[f64], cfg: &ClusterConfig) -> Clustering {
    let Some(fit) = select_gmm_noisy(values, noise, cfg) else {
        return Clustering {
            labels: vec![],
            means: vec![],
            sizes: vec![],
            components: 0,
        };
    };
    let comp: Vec<usize> = values
        .iter()
        .enumerate()
        .map(|(i, &x)| fit.assign_with_noise(x, noise.get(i).copied().unwrap_or(0.0)))
        .collect();
    // group components
    let mut group: Vec<usize> = (0..fit.k()).collect();
    if cfg.merge_modes && fit.k() > 1 {
        let scale = fit.variances.iter().cloned().fold(f64::INFINITY, f64::min).sqrt();
        let modes: Vec<f64> = fit.means.iter().map(|&m| fit.climb(m)).collect();
        for j in 0..fit.k() {
            for i in 0..j {
                if (modes[i] - modes[j]).abs() <= 1e-3 * scale.max(1e-12) + 1e-9 * modes[j].abs() {
                    group[j] = group[i];
                    break;
                }
            }
        }
    }
    finish(values, comp.iter().map(|&c| group[c]).collect(), fit.k())
}

/// Merge neighbouring classes whose means are closer than the typical
/// `resolution` of either class (median over its members), repeatedly and
/// worst-resolved pair first.
pub fn merge_unresolved(values: &[f64], c: &Clustering, resolution: &[f64]) -> Clustering {
    let mut group: Vec<usize> = c.labels.clone();
    loop {
        let merged = finish(values, group.clone(), c.components);
        let mut per_class = vec![Vec::new(); merged.k()];
        for (i, &l) in merged.labels.iter().enumerate() {
            per_class[l].push(resolution[i]);
        }
        let typical: Vec<f64> = per_class.iter_mut().map(|r| median(r)).collect();
        let hit = (0..merged.k().saturating_sub(1))
            .map(|a| {
                let gap = merged.means[a + 1] - merged.means[a];
                (a, gap / typical[a].max(typical[a + 1]))
            })
            .filter(|&(_, ratio)| ratio <= 1.0)
            .min_by(|x, y| x.1.total_cmp(&y.1));
        match hit {
            Some((a, _)) => {
                group = merged.labels.iter().map(|&l| if l > a { l - 1 } else { l }).collect();
            }
            None => return merged,
        }
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    match v.len() {
        0 => 0.0,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// Renumber raw group ids by increasing member mean, dropping empty groups.
fn finish(values: &[f64], raw: Vec<usize>, components: usize) -> Clustering {
    let n_raw = raw.iter().max().map_or(0, |m| m + 1);
    let mut sum = vec![0.0; n_raw];
    let mut cnt = vec![0usize; n_raw];
    for (&x, &g) in values.iter().zip(&raw) {
        sum[g] += x;
        cnt[g] += 1;
    }
    let mut order: Vec<usize> = (0..n_raw).filter(|&g| cnt[g] > 0).collect();
    order.sort_by(|&a, &b| (sum[a] / cnt[a] as f64).total_cmp(&(sum[b] / cnt[b] as f64)));
    let mut remap = vec![usize::MAX; n_raw];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new;
    }
    Clustering {
        labels: raw.iter().map(|&g| remap[g]).collect(),
        means: order.iter().map(|&g| sum[g] / cnt[g] as f64).collect(),
        sizes: order.iter().map(|&g| cnt[g]).collect(),
        components,
    }
}

/// Cut point for circular data: the middle of the widest empty arc.
pub fn circular_cut(values: &[f64]) -> f64 {
    let mut a: Vec<f64> = values.iter().map(|&x| modone(x)).collect();
    a.sort_by(f64::total_cmp);
    if a.is_empty() {
        return 0.0;
    }
    let mut best = (a[0] + TAU - a[a.len() - 1], 0.5 * (a[a.len() - 1] + a[0] + TAU));
    for w in a.windows(2) {
        if w[1] - w[0] > best.0 {
            best = (w[1] - w[0], 0.5 * (w[0] + w[1]));
        }
    }
    modone(best.1)
}

/// Unwrap angles so that they lie in `[cut, cut + 2π)`.
pub fn unwrap_from(values: &[f64], cut: f64) -> Vec<f64> {
    values.iter().map(|&x| cut + modone(x - cut)).collect()
}

/// Cluster angles on the circle. Means are returned in `[0, 2π)`, and
/// classes are numbered by increasing mean.
pub fn cluster_circular(values: &[f64], cfg: &ClusterConfig) -> Clustering {
    cluster_circular_noisy(values, &[], cfg)
}

/// [`cluster_circular`] for angles with known standard deviations `noise`.
pub fn cluster_circular_noisy(values: &[f64], noise: &[f64], cfg: &ClusterConfig) -> Clustering {
    let cut = circular_cut(values);
    let unwrapped = unwrap_from(values, cut);
    let c = cluster_1d_noisy(&unwrapped, noise, cfg);
    let means: Vec<f64> = c.means.iter().map(|&m| modone(m)).collect();
    let mut order: Vec<usize> = (0..means.len()).collect();
    order.sort_by(|&a, &b| means[a].total_cmp(&means[b]));
    let mut remap = vec![0; means.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new;
    }
    Clustering {
        labels: c.labels.iter().map(|&l| remap[l]).collect(),
        means: order.iter().map(|&i| means[i]).collect(),
        sizes: order.iter().map(|&i| c.sizes[i]).collect(),
        components: c.components,
    }
}

/// Mean of angles that do not straddle a full turn, in `[0, 2π)`.
pub fn circular_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let cut = circular_cut(values);
    let u = unwrap_from(values, cut);
    modone(u.iter().sum::<f64>() / u.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn two_well_separated_groups() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let j = Normal::new(0.0, 0.1).unwrap();
        let mut v: Vec<f64> = (0..50).map(|_| 10.0 + j.sample(&mut rng)).collect();
        v.extend((0..50).map(|_| 20.0 + j.sample(&mut rng)));
        let c = cluster_1d(&v, &ClusterConfig::default());
        assert_eq!(c.k(), 2);
        assert!((c.means[0] - 10.0).abs() < 0.1);
        assert!((c.means[1] - 20.0).abs() < 0.1);
        assert_eq!(c.sizes, vec![50, 50]);
    }

    #[test]
    fn degenerate_inputs() {
        let c = cluster_1d(&[3.5; 17], &ClusterConfig::default());
        assert_eq!(c.k(), 1);
        assert_eq!(c.means, vec![3.5]);
        assert_eq!(cluster_1d(&[], &ClusterConfig::default()).k(), 0);
    }

    #[test]
    fn exact_values_give_exact_classes() {
        let mut v = vec![50.0; 40];
        v.extend(vec![86.60254037844386; 25]);
        v.extend(vec![100.0; 18]);
        let c = cluster_1d(&v, &ClusterConfig::default());
        assert_eq!(c.k(), 3);
        assert_eq!(c.sizes, vec![40, 25, 18]);
    }

    #[test]
    fn circular_groups_across_zero() {
        let v = [0.05, 0.02, TAU - 0.03, TAU - 0.01, 3.0, 3.02, 2.98];
        let c = cluster_circular(&v, &ClusterConfig::default());
        assert_eq!(c.k(), 2);
        assert!(c.means.iter().any(|&m| m < 0.01 || m > TAU - 0.01));
        assert!(c.means.iter().any(|&m| (m - 3.0).abs() < 0.01));
        let m0 = circular_mean(&[TAU - 0.1, 0.1]);
        assert!(m0 < 1e-12 || TAU - m0 < 1e-12);
        assert!((circular_mean(&[1.57, 1.58, 1.56]) - 1.57).abs() < 1e-12);
    }

    #[test]
    fn heavy_tail_is_one_class() {
        // a tight core with a wide skirt around the same centre
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let core = Normal::new(40.0, 0.2).unwrap();
        let skirt = Normal::new(40.0, 2.0).unwrap();
        let mut v: Vec<f64> = (0..300).map(|_| core.sample(&mut rng)).collect();
        v.extend((0..100).map(|_| skirt.sample(&mut rng)));
        let c = cluster_1d(&v, &ClusterConfig::default());
        assert_eq!(c.k(), 1, "components {}", c.components);
    }
}
