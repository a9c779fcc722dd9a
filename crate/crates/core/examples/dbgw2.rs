use fronttrack::field::*;
use fronttrack::flux::*;
use fronttrack::tracking::*;
use fronttrack::weight::*;
use std::sync::Arc;

fn main() {
    let h = 0.1;
    let model = Arc::new(FluxModel::Scalar(ScalarModel::new(ScalarFlux::Burgers, -3.0, 3.0, h, 8)));
    let sa: Vec<State> = [0.1, -0.5, 0.3, 0.1].iter().map(|&u| State::scalar(u)).collect();
    let sb: Vec<State> = [0.1, 0.4, 0.1].iter().map(|&u| State::scalar(u)).collect();
    let pa = discretize_initial(&model, &[-1.0, 0.0, 0.8], &sa, h, 8).unwrap();
    let pb = discretize_initial(&model, &[-0.2, 0.3], &sb, h, 9).unwrap();
    let ra = evolve(model.clone(), pa, h, 2.0, EVENT_BUDGET).unwrap();
    let rb = evolve(model, pb, h, 2.0, EVENT_BUDGET).unwrap();
    let field = build_averaged_field(&ra, &rb, 0.1, 0.1).unwrap();
    let wf = build_weight_scalar(&field, 10.0, 0.0).unwrap();
    let sheet = &wf.sheets[0];
    let strip = &sheet.strips[0];
    println!("strip0 [{};{}] slab {} n_lines {}", strip.t0, strip.t1, strip.slab, strip.lines.len());
    for (li, l) in strip.lines.iter().enumerate() {
        if (4..14).contains(&li) || (74..84).contains(&li) {
            println!("line {li}: x0={:.8} speed={:.8} rec={:?} vals=({:.6},{:.6})",
                l.x0, l.speed, l.rec, strip.values[li], strip.values[li+1]);
        }
    }
    // slab 0 record speeds
    let slab = &field.slabs[0];
    for (k, r) in slab.records.iter().enumerate() {
        println!("rec {k}: owner {:?} x0={:.8} speed={:.8} class {:?} strength={:.2e}", r.owner, r.x0, r.speed, r.analysis.class, r.analysis.strength);
    }
}
