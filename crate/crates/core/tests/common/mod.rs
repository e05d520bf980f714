#![allow(dead_code)]

use radshock::profile::Profile;

/// Fixed-step RK4 shooting for the scalar (Q, P) system with U recovered
/// from U^2/2 + Q = eps^2/8 on the branch sign(U) = side.
pub struct Shoot {
    pub eps: f64,
    pub side: f64,
}

impl Shoot {
    fn u(&self, q: f64) -> f64 {
        self.side * (0.25 * self.eps * self.eps - 2.0 * q).max(0.0).sqrt()
    }
    fn rhs(&self, y: [f64; 2]) -> [f64; 2] {
        let u = self.u(y[0]);
        [y[1], y[0] - y[1] / u]
    }
    fn step(&self, y: [f64; 2], h: f64) -> [f64; 2] {
        let k1 = self.rhs(y);
        let k2 = self.rhs([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = self.rhs([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = self.rhs([y[0] + h * k3[0], y[1] + h * k3[1]]);
        [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    }
    fn start(&self) -> [f64; 2] {
        // slow root of mu^2 + mu / u_end - 1 = 0, Q > 0 on the eigenvector
        let c = 1.0 / (self.side * 0.5 * self.eps);
        let d = (c * c + 4.0).sqrt();
        let mu = if self.side > 0.0 { (-c + d) / 2.0 } else { (-c - d) / 2.0 };
        let q0 = 1e-13;
        [q0, mu * q0]
    }
    /// Integrate toward the sonic point (direction dir), stopping when
    /// |U| < stop; returns the extrapolated node position and visits states.
    fn run<F: FnMut(f64, [f64; 2])>(&self, h: f64, stop: f64, mut visit: F) -> f64 {
        let dir = self.side;
        let mut y = self.start();
        let mut x = 0.0;
        loop {
            visit(x, y);
            let u = self.u(y[0]);
            if u.abs() < stop {
                let ux = -y[1] / u;
                return x - u / ux;
            }
            y = self.step(y, dir * h);
            x += dir * h;
        }
    }
}

/// Sup-norm gap between the profile and the shooting oracle on the profile
/// grid, with the number of nodes compared.
pub fn shooting_gap(prof: &Profile) -> (f64, usize) {
    let eps = prof.epsilon();
    let h = 1e-5;
    let stop = 1e-4 * eps;
    let mut worst: f64 = 0.0;
    let mut compared = 0usize;
    for side in [1.0, -1.0] {
        let s = Shoot { eps, side };
        let node = s.run(h, stop, |_, _| {});
        // second pass: compare on the profile grid, hitting grid points by
        // a partial step from the current lattice point
        let targets: Vec<f64> = prof.grid.iter().cloned().filter(|&x| x * side < 0.0 && x.abs() > 0.01).collect();
        let mut tgt: Vec<f64> = targets.iter().map(|x| x + node).collect();
        tgt.sort_by(|a, b| (a * side).partial_cmp(&(b * side)).unwrap());
        let mut k = 0;
        let mut first = true;
        s.run(h, stop, |x, y| {
            while k < tgt.len() {
                let t = tgt[k];
                let ahead = (t - x) * side;
                if ahead <= 0.0 && first {
                    // grid point lies before the oracle start
                    k += 1;
                    continue;
                }
                first = false;
                if ahead <= 0.0 && ahead > -h {
                    let yy = s.step(y, t - x);
                    let pp = prof.eval(t - node);
                    let e = (s.u(yy[0]) - pp.u[0]).abs().max((yy[0] - pp.q).abs());
                    worst = worst.max(e);
                    compared += 1;
                    k += 1;
                } else {
                    break;
                }
            }
        });
    }
    (worst, compared)
}

/// Picard iteration of Phi(x) = int_{-20}^x e^{-2(x-y)} 0.1 (1 - Phi(y)^2) dy,
/// exact for piecewise-linear integrands.
pub fn picard_oracle(xs: &[f64]) -> Vec<f64> {
    let mut phi = vec![0.0; xs.len()];
    for _ in 0..40 {
        let g: Vec<f64> = phi.iter().map(|p| 0.1 * (1.0 - p * p)).collect();
        let mut next = vec![0.0; xs.len()];
        for i in 1..xs.len() {
            let h = xs[i] - xs[i - 1];
            let e = (-2.0 * h).exp();
            // int_0^h e^{-2(h-s)} (g0 + (g1-g0) s/h) ds
            let w1 = (1.0 - e) / 2.0;
            let ws = h / 2.0 - (1.0 - e) / 4.0;
            next[i] = e * next[i - 1] + g[i - 1] * w1 + (g[i] - g[i - 1]) / h * ws;
        }
        phi = next;
    }
    phi
}
