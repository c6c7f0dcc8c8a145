//! Error-free transformations for sums and dot products whose terms cancel.

/// Neumaier-compensated sum.
pub fn sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for t in terms {
        let u = s + t;
        c += if s.abs() >= t.abs() { (s - u) + t } else { (t - u) + s };
        s = u;
    }
    s + c
}

/// Accumulates `Σ aᵢ·bᵢ` in roughly twice working precision (Ogita–Rump–Oishi Dot2).
#[derive(Clone, Copy, Debug, Default)]
pub struct Dot2 {
    hi: f64,
    lo: f64,
}

impl Dot2 {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        let pe = a.mul_add(b, -p);
        self.add(p);
        self.lo += pe;
    }

    pub fn add(&mut self, t: f64) {
        let s = self.hi + t;
        let z = s - self.hi;
        self.lo += (self.hi - (s - z)) + (t - z);
        self.hi = s;
    }

    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_survives() {
        assert_eq!(sum([1e16, 1.0, -1e16]), 1.0);
        let mut d = Dot2::new();
        let big = 2f64.powi(27) + 1.0;
        d.add_product(big, big);
        d.add(-(2f64.powi(54)));
        d.add(-(2f64.powi(28)));
        assert_eq!(d.value(), 1.0);
    }
}
