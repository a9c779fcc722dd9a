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
    println!("events A={} B={}", ra.events.len(), rb.events.len());
    let field = build_averaged_field(&ra, &rb, 0.1, 0.1).unwrap();
    println!("slabs={} branch={}", field.slabs.len(), field.branch_points.len());
    let wf = build_weight_scalar(&field, 10.0, 0.0).unwrap();
    let audit = check_weight_constraints(&field, &wf, &WeightRule::Scalar, 10.0);
    println!("audit: checks={} worst={:e}", audit.equality_checks, audit.worst_equality_residual);
    // per-strip audit detail
    for (j, sheet) in wf.sheets.iter().enumerate() {
        for (sidx, strip) in sheet.strips.iter().enumerate() {
            let slab = &field.slabs[strip.slab];
            for (li, line) in strip.lines.iter().enumerate() {
                let Some(rk) = line.rec else { continue };
                let rec = &slab.records[rk];
                let dw = strip.values[li + 1] - strip.values[li];
                if let Some(jump) = rule_jump(&WeightRule::Scalar, rec, j, 10.0) {
                    if (dw - jump).abs() > 1e-9 {
                        println!("strip {sidx} [{:.4},{:.4}] slab {} line {li} rec {rk} class {:?} dw={:.6} J={:.6} owner {:?} fam {}",
                          strip.t0, strip.t1, strip.slab, rec.analysis.class, dw, jump, rec.owner, rec.family);
                    }
                }
            }
        }
    }
    let ledger = norm_derivative_ledger(&field, &wf).unwrap();
    println!("fd mismatch {:e}", ledger.max_fd_mismatch);
    for iv in ledger.intervals.iter() {
        if (iv.fd_derivative - iv.total).abs() > 1e-6 {
            println!("interval [{:.5},{:.5}] total={:.6} fd={:.6}", iv.t0, iv.t1, iv.total, iv.fd_derivative);
        }
    }
    let cover = backward_characteristics(&field, 0).unwrap();
    println!("cover {}/{}", cover.visited_cells, cover.total_cells);
}
