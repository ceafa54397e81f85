//! Compensated accumulators and estimator summaries.

use std::fmt;
use std::str::FromStr;

/// 95% two-sided normal quantile.
pub const Z_95: f64 = 1.96;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sample mean and variance through compensated first and second moments.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanAccumulator {
    n: u64,
    sum: NeumaierSum,
    sum_sq: NeumaierSum,
}

impl MeanAccumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum.add(x);
        self.sum_sq.add(x * x);
    }

    pub fn merge(&mut self, other: &MeanAccumulator) {
        self.n += other.n;
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            self.sum.value() / self.n as f64
        }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let mean = self.sum.value() / n;
        ((self.sum_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0)
    }
}

/// Whether the standard error follows the mean or the binomial formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    Mean,
    Proportion,
    /// Product of proportions with a delta-method standard error.
    Product,
    /// Deterministic evaluation, no sampling error.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    OpUser,
    OpPair,
    ErUser,
    Se,
    Ee,
    ResidueMean,
    FeasibilityRate,
    OpOma,
    ErExact,
}

impl Metric {
    pub const ALL: [Metric; 9] = [
        Metric::OpUser,
        Metric::OpPair,
        Metric::ErUser,
        Metric::Se,
        Metric::Ee,
        Metric::ResidueMean,
        Metric::FeasibilityRate,
        Metric::OpOma,
        Metric::ErExact,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::OpUser => "OP_user",
            Metric::OpPair => "OP_pair",
            Metric::ErUser => "ER_user",
            Metric::Se => "SE",
            Metric::Ee => "EE",
            Metric::ResidueMean => "residue_mean",
            Metric::FeasibilityRate => "feasibility_rate",
            Metric::OpOma => "OP_oma",
            Metric::ErExact => "ER_exact",
        }
    }

    pub fn scope(&self) -> MetricScope {
        match self {
            Metric::OpUser | Metric::ErUser | Metric::ResidueMean | Metric::OpOma | Metric::ErExact => {
                MetricScope::User
            }
            Metric::OpPair | Metric::Se | Metric::Ee => MetricScope::Cluster,
            Metric::FeasibilityRate => MetricScope::Network,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .copied()
            .ok_or_else(|| {
                let known: Vec<_> = Metric::ALL.iter().map(|m| m.name()).collect();
                format!("unknown metric `{s}` (expected one of {})", known.join(", "))
            })
    }
}

/// Per-user, per-cluster, or network-wide statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricScope {
    User,
    Cluster,
    Network,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorResult {
    pub metric: Metric,
    /// Zero-based cluster, `None` for network-wide metrics.
    pub cluster: Option<usize>,
    /// Zero-based user, `None` for cluster or network metrics.
    pub user: Option<usize>,
    pub estimate: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub kind: EstimatorKind,
    pub fingerprint: String,
}

impl EstimatorResult {
    fn with_se(metric: Metric, estimate: f64, std_error: f64, trials: u64, kind: EstimatorKind) -> Self {
        EstimatorResult {
            metric,
            cluster: None,
            user: None,
            estimate,
            std_error,
            ci_low: estimate - Z_95 * std_error,
            ci_high: estimate + Z_95 * std_error,
            trials,
            kind,
            fingerprint: String::new(),
        }
    }

    /// `SE = s/√n`.
    pub fn from_mean(metric: Metric, acc: &MeanAccumulator) -> Self {
        let n = acc.count();
        let se = if n == 0 {
            f64::NAN
        } else {
            (acc.variance() / n as f64).sqrt()
        };
        Self::with_se(metric, acc.mean(), se, n, EstimatorKind::Mean)
    }

    /// `SE = √(p̂(1−p̂)/n)`.
    pub fn from_proportion(metric: Metric, acc: &MeanAccumulator) -> Self {
        let n = acc.count();
        let p = acc.mean();
        let se = if n == 0 {
            f64::NAN
        } else {
            (p * (1.0 - p) / n as f64).sqrt()
        };
        Self::with_se(metric, p, se, n, EstimatorKind::Proportion)
    }

    /// Product of proportions `Π p_k` with the delta-method standard error
    /// `√(∇ᵀ Σ ∇ / n)`, where `Σ` is the sample covariance of the indicators.
    pub fn from_product(metric: Metric, means: &[f64], cov: &[Vec<f64>], n: u64) -> Self {
        let estimate: f64 = means.iter().product();
        let grad: Vec<f64> = (0..means.len())
            .map(|j| {
                means
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != j)
                    .map(|(_, p)| p)
                    .product()
            })
            .collect();
        let mut var = 0.0;
        for i in 0..means.len() {
            for j in 0..means.len() {
                var += grad[i] * grad[j] * cov[i][j];
            }
        }
        let se = if n == 0 {
            f64::NAN
        } else {
            (var.max(0.0) / n as f64).sqrt()
        };
        Self::with_se(metric, estimate, se, n, EstimatorKind::Product)
    }

    pub fn exact(metric: Metric, value: f64) -> Self {
        Self::with_se(metric, value, 0.0, 0, EstimatorKind::Exact)
    }

    pub fn at(mut self, cluster: Option<usize>, user: Option<usize>) -> Self {
        self.cluster = cluster;
        self.user = user;
        self
    }

    pub fn with_fingerprint(mut self, fingerprint: impl Into<String>) -> Self {
        self.fingerprint = fingerprint.into();
        self
    }

    pub fn covers(&self, truth: f64) -> bool {
        self.ci_low <= truth && truth <= self.ci_high
    }

    /// `|estimate − reference| ≤ z·SE`.
    pub fn within(&self, reference: f64, z: f64) -> bool {
        (self.estimate - reference).abs() <= z * self.std_error
    }
}
