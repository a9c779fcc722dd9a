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
    for (i, s) in field.slabs.iter().enumerate().take(8) {
        println!("slab {i}: [{:.6}, {:.6}] records {}", s.t0, s.t1, s.records.len());
    }
    let wf = build_weight_scalar(&field, 10.0, 0.0).unwrap();
    for si in 44..54 {
        let st = &wf.sheets[0].strips[si];
        println!("strip {si}: [{:.6}, {:.6}] slab {}", st.t0, st.t1, st.slab);
    }
}
