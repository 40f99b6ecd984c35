use bipolar::enumerate::{enum_walks_in_cone, ConeSpec};
use bipolar::kmsw::build;
use bipolar::sampler::{apply_phi, is_boundary_channeled};

fn main() {
    for perimeter in 2..=4usize {
        for l in 1..perimeter {
            let r = perimeter - l;
            for n in 1..=6usize {
                let Ok(walks) = enum_walks_in_cone(n.wrapping_sub(1), (0,0),
                    Some((l as i64 -1, -(r as i64)+1)), ConeSpec::bipolar(r as i64)) else { continue };
                for w in walks {
                    let m = build(&w);
                    if !bipolar::sampler::is_strictly_channeled(&m).unwrap() { continue; }
                    for k in 1..r {
                        match apply_phi(&m, k) {
                            Ok(img) => {
                                if let Err(e) = img.boundary_segments() {
                                    println!("FAIL l={l} r={r} k={k} walk {:?}: {e}", w.steps);
                                    println!("  edges: {:?}", img.edges);
                                    println!("  rot: {:?}", img.rotation);
                                    println!("  root: {:?}", img.root_edge);
                                    return;
                                }
                            }
                            Err(e) => { println!("phi err l={l} r={r} k={k}: {e}"); return; }
                        }
                    }
                }
            }
        }
    }
    println!("all good");
}
