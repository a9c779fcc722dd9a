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
    for cell in [8usize, 9] {
        WALK_TRACE.with(|w| *w.borrow_mut() = Some(Vec::new()));
        let (d, _) = debug_trace_cell(&field, &wf, &WeightRule::Scalar, 10.0, 0, 0, cell);
        let tr = WALK_TRACE.with(|w| w.borrow_mut().take().unwrap());
        println!("== cell (0,{cell}) total {d:.6}: {} crossings", tr.len());
        for (s, t, x, rec, _) in tr {
            let st = &wf.sheets[0].strips[s];
            let info = match rec {
                Some(rk) => {
                    let r = &field.slabs[st.slab].records[rk];
                    format!("rec{rk} owner {:?} class {:?} speed {:.5} strength {:.2e}", r.owner, r.analysis.class, r.speed, r.analysis.strength)
                }
                None => "sep".into(),
            };
            println!("  t={t:.6} x={x:.6} strip {s} {}", info);
        }
    }
}
