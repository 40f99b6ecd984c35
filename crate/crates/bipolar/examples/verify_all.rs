fn main() {
    let args: Vec<String> = std::env::args().collect();
    let suites: Vec<&str> = if args.len() > 1 {
        args[1..].iter().map(|s| s.as_str()).collect()
    } else {
        vec!["pitman", "ruin", "phi", "geodesics", "quadrant-split", "cutequiv", "roundtrip", "boltzmann-law"]
    };
    for s in suites {
        let t0 = std::time::Instant::now();
        match bipolar::verify::run_suite(s, 42) {
            Ok(rep) => {
                for c in &rep.checks {
                    println!("[{}] {} {}: {}", if c.pass {"PASS"} else {"FAIL"}, rep.suite, c.name, c.detail);
                }
            }
            Err(e) => println!("[ERROR] {s}: {e}"),
        }
        println!("  ({:.1}s)", t0.elapsed().as_secs_f64());
    }
}
