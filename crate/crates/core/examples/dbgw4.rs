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
    let strips = &wf.sheets[0].strips;
    for si in [47usize, 48, 49] {
        let st = &strips[si];
        println!("strip {si} [{:.6},{:.6}] slab {} lines {}", st.t0, st.t1, st.slab, st.lines.len());
        for (li, l) in st.lines.iter().enumerate().take(10) {
            let info = match l.rec {
                Some(rk) => {
                    let r = &field.slabs[st.slab].records[rk];
                    format!("rec{rk} {:?} {:?} strength {:.2e} speed {:.4}", r.owner, r.analysis.class, r.analysis.strength, r.speed)
                }
                None => format!("sep speed {:.4}", l.speed),
            };
            println!("  line {li}: x0={:.6} {}", l.x0, info);
        }
    }
}
