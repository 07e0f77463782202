//! Bootstrap means, a signed-rank test, densities and rank correlation.

use cascade_forge::nullmodel::bootstrap_means;
use cascade_forge::stats::{kde, spearman, summarize, wilcoxon_signed_rank, DEFAULT_KDE_POINTS};
use cascade_forge::Seed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fast: Vec<f64> = Exp::new(1.0 / 45.0).unwrap().sample_iter(&mut rng).take(300).collect();
    let slow: Vec<f64> = Exp::new(1.0 / 120.0).unwrap().sample_iter(&mut rng).take(300).collect();

    let bf = bootstrap_means(&fast, 5_000, Seed(1)).unwrap();
    let bs = bootstrap_means(&slow, 5_000, Seed(2)).unwrap();
    println!("bootstrap means: {:?}", summarize(&bf).unwrap());
    println!("                 {:?}", summarize(&bs).unwrap());
    let w = wilcoxon_signed_rank(&bf, &bs).unwrap();
    println!("signed-rank statistic {} p = {:.3e} (exact: {})", w.statistic, w.p_two_sided, w.exact);

    let k = kde(&fast, DEFAULT_KDE_POINTS).unwrap();
    let peak = k.xs.iter().zip(&k.density).max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    println!("kde bandwidth {:.2}, mode near {:.1}, integral {:.4}", k.bandwidth, peak.0, k.integral());

    let x: Vec<f64> = (1..=20).map(f64::from).collect();
    let y: Vec<f64> = x.iter().map(|v| v.ln() + 0.1 * (v * 7.0).sin()).collect();
    println!("spearman rho {:.3}", spearman(&x, &y).unwrap());
}
