use entlab::linalg::{hermitian_eig, ComplexMatrix};
use entlab::seed::task_rng;
use num_complex::Complex64;
use rand::Rng;
use std::time::Instant;

fn main() {
    let sizes: Vec<usize> = std::env::args().skip(1).map(|s| s.parse().unwrap()).collect();
    for &n in &sizes {
        let mut rng = task_rng(1, "bench", n as u64);
        let a = ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, 0.0));
        let m = a.add(&a.adjoint()).scaled(Complex64::new(0.5, 0.0));
        let t = Instant::now();
        let eig = hermitian_eig(&m).unwrap();
        println!("real n={n}: {:.2}s (lmin={:.4})", t.elapsed().as_secs_f64(), eig.eigenvalues[0]);
    }
}
