use svv_core::entropy::{goursat_solve, EntropyKernel, EntropySpec};
use svv_core::pressure_law::{Polytropic, PressureLaw};

fn error_on_coarse_nodes(n: usize, coarse: usize) -> f64 {
    let law = PressureLaw::polytropic_scaled(2.0).unwrap();
    let kernel = EntropyKernel::new(Polytropic::scaled(2.0).unwrap());
    let table = goursat_solve(&law, 4.0, n).unwrap();
    let stride = n / coarse;
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for i in 0..=coarse {
        for j in 0..=(coarse - i) {
            let (rho, u, eta, _) = table.node(i * stride, j * stride);
            let oracle = kernel
                .pair_normalized(&EntropySpec::SignedQuadratic, rho, rho * u)
                .unwrap()
                .eta;
            worst = worst.max((eta - oracle).abs());
            scale = scale.max(oracle.abs());
        }
    }
    worst / scale
}

#[test]
fn special_entropy_matches_signed_quadratic_generator() {
    let errs: Vec<f64> = [64, 128, 256].iter().map(|&n| error_on_coarse_nodes(n, 64)).collect();
    eprintln!("goursat errors {errs:?}");
    assert!(errs[2] <= 1e-3);
    let order = ((errs[0] / errs[1]).log2() + (errs[1] / errs[2]).log2()) / 2.0;
    assert!(order >= 1.5, "order {order}");
}

#[test]
fn special_flux_matches_signed_quadratic_generator() {
    let law = PressureLaw::polytropic_scaled(2.0).unwrap();
    let kernel = EntropyKernel::new(Polytropic::scaled(2.0).unwrap());
    let table = goursat_solve(&law, 4.0, 256).unwrap();
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for (_, _, (rho, u, _, q)) in table.nodes() {
        let oracle = kernel.pair_normalized(&EntropySpec::SignedQuadratic, rho, rho * u).unwrap().q;
        worst = worst.max((q - oracle).abs());
        scale = scale.max(oracle.abs());
    }
    assert!(worst / scale <= 5e-3, "{}", worst / scale);
}
