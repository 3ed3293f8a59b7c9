//! Airy evaluation against a double-double Maclaurin oracle.

use airy_fredholm::airy::{airy, airy_asymptotic, airy_kernel};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy)]
struct Dd(f64, f64);

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd(s, (a - (s - bb)) + (b - bb))
}

impl Dd {
    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.0, o.0);
        let t = two_sum(self.1, o.1);
        let v = two_sum(s.0, s.1 + t.0);
        two_sum(v.0, v.1 + t.1)
    }
    fn mul_f(self, b: f64) -> Dd {
        let p = self.0 * b;
        let e = self.0.mul_add(b, -p);
        two_sum(p, e + self.1 * b)
    }
    fn div_f(self, b: f64) -> Dd {
        let q1 = self.0 / b;
        let r = self.sub_prod(q1, b);
        let q2 = (r.0 + r.1) / b;
        two_sum(q1, q2)
    }
    /// `self - q * b` computed exactly enough for one correction step.
    fn sub_prod(self, q: f64, b: f64) -> Dd {
        let p = q * b;
        let e = q.mul_add(b, -p);
        self.add(Dd(-p, -e))
    }
    fn value(self) -> f64 {
        self.0 + self.1
    }
}

/// 200-term Maclaurin series of `Ai` and `Ai'` in double-double arithmetic.
fn oracle(x: f64) -> (f64, f64) {
    // c_n of sum c_n x^n, with c_{n+3} = c_n / ((n+3)(n+2))
    let mut c = vec![Dd(0.0, 0.0); 203];
    c[0] = Dd(0.3550280538878172, 2.05233632436212e-17);
    c[1] = Dd(-0.2588194037928068, 2.522243111610832e-17);
    for n in 0..200 {
        c[n + 3] = c[n].div_f(((n + 3) * (n + 2)) as f64);
    }
    let mut ai = Dd(0.0, 0.0);
    let mut aip = Dd(0.0, 0.0);
    for n in (0..203).rev() {
        ai = ai.mul_f(x).add(c[n]);
    }
    for n in (1..203).rev() {
        aip = aip.mul_f(x).add(c[n].mul_f(n as f64));
    }
    (ai.value(), aip.value())
}

#[test]
fn oracle_points() {
    let (a10, _) = oracle(10.0);
    assert!((airy(10.0).unwrap().ai - a10).abs() < 1e-12 * a10.abs());
    let (am5, _) = oracle(-5.0);
    assert!((airy(-5.0).unwrap().ai - am5).abs() < 1e-11 * am5.abs());
}

#[test]
fn matches_oracle_on_grid() {
    let mut x = -10.0;
    while x <= 10.0 {
        let v = airy(x).unwrap();
        let (ai, aip) = oracle(x);
        // envelope keeps the comparison meaningful near zeros
        let env = ai.abs().max(aip.abs() / (1.0 + x.abs()).sqrt());
        assert!((v.ai - ai).abs() < 1e-12 * env, "Ai({x}): {} vs {ai}", v.ai);
        assert!((v.ai_prime - aip).abs() < 1e-12 * env * (1.0 + x.abs()).sqrt(), "Ai'({x})");
        x += 0.0625 + 1e-3;
    }
}

#[test]
fn series_and_asymptotic_agree_on_overlap() {
    for sign in [1.0, -1.0] {
        let mut m = 4.0;
        while m <= 8.0 {
            let x = sign * m;
            let (ai, _) = oracle(x);
            let prod = airy(x).unwrap().ai;
            let env = if x > 0.0 { ai.abs() } else { 1.0 / (m.sqrt().sqrt() * std::f64::consts::PI.sqrt()) };
            assert!((prod - ai).abs() < 1e-10 * env, "x={x}");
            m += 0.25;
        }
    }
    // the bare asymptotic expansion reaches the same accuracy from about |x| = 7
    for x in [7.0, 7.5, 8.0, -7.0, -7.5, -8.0] {
        let (ai, _) = oracle(x);
        let a = airy_asymptotic(x).unwrap().ai;
        let env = if x > 0.0 { ai.abs() } else { 0.3 };
        assert!((a - ai).abs() < 1e-10 * env, "x={x}");
    }
}

#[test]
fn ode_residual() {
    let h = 1e-3;
    let mut x = -20.0;
    while x <= 20.0 {
        let d = |k: f64| airy(x + k * h).unwrap().ai_prime;
        let second = (-d(2.0) + 8.0 * d(1.0) - 8.0 * d(-1.0) + d(-2.0)) / (12.0 * h);
        let v = airy(x).unwrap();
        let env = (x * v.ai).abs() + v.ai_prime.abs() * (1.0 + x.abs()).sqrt();
        assert!((second - x * v.ai).abs() < 1e-10 * env, "x={x}");
        x += 0.37;
    }
}

#[test]
fn kernel_matrix_is_psd() {
    for m in [5usize, 20, 50] {
        let grid: Vec<f64> = (0..m).map(|i| -10.0 + 20.0 * i as f64 / (m - 1) as f64).collect();
        let k = DMatrix::from_fn(m, m, |i, j| airy_kernel(grid[i], grid[j]).unwrap());
        let eig = k.symmetric_eigenvalues();
        assert!(eig.iter().all(|&l| l >= -1e-10), "m={m} min={}", eig.min());
    }
}

proptest! {
    #[test]
    fn kernel_symmetric_bitwise(u in -15.0f64..15.0, v in -15.0f64..15.0) {
        prop_assert_eq!(airy_kernel(u, v).unwrap().to_bits(), airy_kernel(v, u).unwrap().to_bits());
    }

    #[test]
    fn psd_on_random_grids(mut pts in proptest::collection::vec(-10.0f64..10.0, 2..50)) {
        pts.sort_by(|a, b| a.total_cmp(b));
        let m = pts.len();
        let k = DMatrix::from_fn(m, m, |i, j| airy_kernel(pts[i], pts[j]).unwrap());
        let eig = k.symmetric_eigenvalues();
        prop_assert!(eig.iter().all(|&l| l >= -1e-10));
    }
}
