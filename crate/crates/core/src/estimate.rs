use serde::{Deserialize, Serialize};

/// z-value of a two-sided 95% normal interval.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Monte Carlo point estimate with a normal-approximation 95% interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub point: f64,
    pub half_width: f64,
    pub replicas: u64,
    pub seed: u64,
    /// Fraction of replicas that touched the truncation boundary, when tracked.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_fraction: Option<f64>,
}

impl Estimate {
    /// Binomial proportion `successes / replicas`.
    pub fn proportion(successes: u64, replicas: u64, seed: u64) -> Estimate {
        assert!(replicas >= 1);
        let n = replicas as f64;
        let p = successes as f64 / n;
        Estimate { point: p, half_width: Z95 * (p * (1.0 - p) / n).sqrt(), replicas, seed, boundary_fraction: None }
    }

    /// Sample mean from running sums `sum x` and `sum x^2`.
    pub fn mean(stats: &Moments, seed: u64) -> Estimate {
        assert!(stats.n >= 1);
        Estimate {
            point: stats.mean(),
            half_width: Z95 * stats.std_error(),
            replicas: stats.n,
            seed,
            boundary_fraction: None,
        }
    }

    pub fn with_boundary(mut self, touched: u64) -> Estimate {
        self.boundary_fraction = Some(touched as f64 / self.replicas as f64);
        self
    }

    /// Standard error implied by the half-width.
    pub fn sigma(&self) -> f64 {
        self.half_width / Z95
    }

    /// A single replica gives no spread information.
    pub fn is_degenerate(&self) -> bool {
        self.replicas < 2
    }

    /// More than 20% of replicas touched the boundary.
    pub fn truncation_dominated(&self) -> bool {
        self.boundary_fraction.is_some_and(|f| f > 0.2)
    }
}

/// Order-independent accumulator for sample moments.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(self, other: Moments) -> Moments {
        Moments { n: self.n + other.n, sum: self.sum + other.sum, sum_sq: self.sum_sq + other.sum_sq }
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}
