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
    for cell in [8usize, 9, 10] {
        let (d, log) = debug_trace_cell(&field, &wf, &WeightRule::Scalar, 10.0, 0, 0, cell);
        println!("cell (0,{cell}): total delta={d:.6}; transitions with nonzero delta:");
        let mut prev = 0.0;
        for (s, c, dd) in log {
            if (dd - prev).abs() > 1e-9 {
                println!("   -> strip {s} cell {c} delta {dd:.6}");
                prev = dd;
            }
        }
    }
}
