use bipolar::busemann::*;
use bipolar::distance::Mode;
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let probes: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let n: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let params = WindowParams { initial_window: 256, max_window: 1 << 21, probes };
    for mode in [Mode::Sdp, Mode::Ldp] {
        let t0 = Instant::now();
        let pairs = increment_pairs(mode, n, &params, 12345);
        let censored = pairs.iter().filter(|p| p.is_none()).count();
        let dt = t0.elapsed().as_secs_f64();
        let pos: Vec<i64> = pairs.iter().flatten().map(|p| p.0).collect();
        let neg: Vec<i64> = pairs.iter().flatten().map(|p| p.1).collect();
        let f0 = neg.iter().filter(|&&x| x == 0).count() as f64 / neg.len() as f64;
        let g_neg1 = pos.iter().filter(|&&x| x == -1).count() as f64 / pos.len() as f64;
        println!("{mode:?} probes={probes}: {n} reps {dt:.1}s ({:.1} ms/rep) censored {censored} ({:.2}%) f(0)={f0:.4} g(-1)={g_neg1:.4}",
            1000.0 * dt / n as f64, 100.0 * censored as f64 / n as f64);
        if mode == Mode::Sdp {
            let kappa = 3.0 - 6.0 * g_neg1 * g_neg1 - f0;
            let se_rough = ((12.0*g_neg1*0.5f64).powi(2)/neg.len() as f64 + 0.25/neg.len() as f64).sqrt();
            println!("  kappa_hat = {kappa:.4} (rough se {se_rough:.4})");
        }
    }
}
