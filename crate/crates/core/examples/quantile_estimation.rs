//! Sample quantiles as minimizers of the check loss, with the three
//! selection policies on a tied sample.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uminimizer::estimator::{argmin_interval, kernel_sample, Policy};
use uminimizer::population::builtin;
use uminimizer::problem::{kernel_catalog, loss_catalog};
use uminimizer::Data;

fn main() {
    let identity = kernel_catalog("identity", &[], None).unwrap();
    let median = loss_catalog("check", &[0.5]).unwrap();

    // Even sample size: the median set is the closed interval between the
    // two middle order statistics.
    let ks = kernel_sample(&Data::univariate(vec![4.0, 1.0, 3.0, 2.0]), &identity).unwrap();
    for p in Policy::ALL {
        let iv = argmin_interval(&ks, &median, p).unwrap();
        println!("{p:?}: [{}, {}] -> {}", iv.smallest, iv.largest, iv.selected);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sample = builtin("exponential", &[1.0]).unwrap();
    let data = Data::univariate((0..1001).map(|_| sample.sample(&mut rng)).collect());
    let ks = kernel_sample(&data, &identity).unwrap();
    println!("\nexponential(1), n = 1001");
    for a in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let iv = argmin_interval(&ks, &loss_catalog("check", &[a]).unwrap(), Policy::Midpoint).unwrap();
        println!("  alpha {a:<4}  sample {:.4}  population {:.4}", iv.selected, -(1.0 - a).ln());
    }
}
