use std::sync::OnceLock;

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                if n == 1 {
                    p1 = z;
                    p0 = 1.0;
                }
                dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// ∫_a^b f using this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }
}

/// Shared rules of common orders.
pub fn gauss_legendre(n: usize) -> &'static GaussLegendre {
    static GL8: OnceLock<GaussLegendre> = OnceLock::new();
    static GL16: OnceLock<GaussLegendre> = OnceLock::new();
    static GL32: OnceLock<GaussLegendre> = OnceLock::new();
    match n {
        8 => GL8.get_or_init(|| GaussLegendre::new(8)),
        16 => GL16.get_or_init(|| GaussLegendre::new(16)),
        32 => GL32.get_or_init(|| GaussLegendre::new(32)),
        _ => panic!("gauss_legendre: only orders 8, 16 and 32 are cached"),
    }
}

/// Sum of a fixed rule over consecutive panels given by `breaks`.
pub fn integrate_panels<F: FnMut(f64) -> f64>(rule: &GaussLegendre, breaks: &[f64], mut f: F) -> f64 {
    let mut s = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            s += rule.integrate(w[0], w[1], &mut f);
        }
    }
    s
}

/// Log-spaced breakpoints from lo to hi with roughly `per_decade` panels per decade.
pub fn log_breakpoints(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo);
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let r = (hi / lo).powf(1.0 / n as f64);
    let mut v: Vec<f64> = (0..=n).map(|i| lo * r.powi(i as i32)).collect();
    v[n] = hi;
    v
}
