use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let se = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> =
        (0..n).map(|i| (se.eigenvalues[i], 2.0 * se.eigenvectors[(0, i)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Composite Gauss-Legendre rule over [a, b] with `panels` equal panels.
pub fn composite_gauss<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, order: usize, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for i in 0..order {
            s += w[i] * f(lo + 0.5 * h * (x[i] + 1.0));
        }
    }
    s * 0.5 * h
}

/// Chebyshev points of the first kind on [a, b].
pub fn chebyshev_nodes(n: usize, a: f64, b: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let t = (std::f64::consts::PI * (2 * k + 1) as f64 / (2 * n) as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * t
        })
        .collect()
}

/// Monomial coefficients (in x) of the least-squares polynomial of degree
/// `deg` through samples on the symmetric interval [-h, h]. Works in the
/// scaled variable x/h for conditioning.
pub fn taylor_fit(xs: &[f64], ys: &[f64], deg: usize, h: f64) -> Vec<f64> {
    let m = xs.len();
    let v = DMatrix::from_fn(m, deg + 1, |i, j| (xs[i] / h).powi(j as i32));
    let rhs = nalgebra::DVector::from_column_slice(ys);
    let sol = v.svd(true, true).solve(&rhs, 1e-14).expect("svd solve");
    (0..=deg).map(|j| sol[j] / h.powi(j as i32)).collect()
}
