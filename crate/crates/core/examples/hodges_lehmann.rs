//! U-quantile estimators: Hodges-Lehmann (median of Walsh averages),
//! Bickel-Lehmann (median of |X_i - X_j|), a weighted Walsh variant and the
//! Theil-Sen slope.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uminimizer::estimator::{argmin_interval, kernel_sample, Policy};
use uminimizer::population::{builtin, RawModel};
use uminimizer::problem::{kernel_catalog, loss_catalog};

fn main() {
    let median = loss_catalog("check", &[0.5]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let raw = RawModel::Iid(builtin("cauchy", &[2.0, 1.0]).unwrap());
    let data = raw.sample(&mut rng, 200);
    println!("Cauchy(2, 1) sample, n = 200");
    for (name, k) in [
        ("sample median", kernel_catalog("identity", &[], None).unwrap()),
        ("Hodges-Lehmann", kernel_catalog("walsh", &[], None).unwrap()),
        ("Bickel-Lehmann", kernel_catalog("abs_diff", &[], None).unwrap()),
        ("weighted Walsh, beta 0.25", kernel_catalog("mws", &[0.25], None).unwrap()),
    ] {
        let ks = kernel_sample(&data, &k).unwrap();
        let iv = argmin_interval(&ks, &median, Policy::Midpoint).unwrap();
        println!("  {name:<26} {:>8.4}   ({} kernel values)", iv.selected, iv.big_n);
    }
    // Bickel-Lehmann estimates the median of |X1 - X2|, which for Cauchy(., 1)
    // is 2 (the difference is Cauchy(0, 2)).

    let reg = RawModel::LinearRegression {
        regressor: builtin("uniform", &[0.0, 10.0]).unwrap(),
        noise: builtin("cauchy", &[0.0, 0.5]).unwrap(),
        intercept: 1.0,
        slope: 0.7,
    };
    let data = reg.sample(&mut rng, 150);
    let ks = kernel_sample(&data, &kernel_catalog("theil_sen", &[], None).unwrap()).unwrap();
    let iv = argmin_interval(&ks, &median, Policy::Midpoint).unwrap();
    println!("\nTheil-Sen slope on y = 1 + 0.7 x + Cauchy noise, n = 150: {:.4}", iv.selected);
}
