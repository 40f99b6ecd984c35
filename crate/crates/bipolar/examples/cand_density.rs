use bipolar::walk::sample_uibot_walk;

fn main() {
    for w_exp in [10usize, 12, 14, 16, 18] {
        let w_len = 1usize << w_exp;
        let mut counts = Vec::new();
        for seed in 0..40u64 {
            let w = sample_uibot_walk(w_len, 900 + seed);
            let pos = w.positions();
            let mut suffix_min = vec![i64::MAX; w_len + 2];
            for j in (0..=w_len).rev() {
                suffix_min[j] = suffix_min[j + 1].min(pos[j].0);
            }
            let mut run_min = pos[0].1;
            let mut count = 0;
            for n in 1..=(3 * w_len / 4) {
                if pos[n].1 < run_min && suffix_min[n] >= pos[n].0 {
                    count += 1;
                }
                run_min = run_min.min(pos[n].1);
            }
            counts.push(count);
        }
        counts.sort_unstable();
        let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
        println!("W=2^{w_exp}: mean {:.2} median {} min {} max {}",
            mean, counts[counts.len()/2], counts[0], counts[counts.len()-1]);
    }
}
