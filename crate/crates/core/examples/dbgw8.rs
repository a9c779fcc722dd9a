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
    for (si, st) in strips.iter().enumerate() {
        if st.t1 < 0.050 || st.t0 > 0.062 { continue; }
        println!("strip {si}: [{:.6},{:.6}] slab {}", st.t0, st.t1, st.slab);
        let dtm = 0.5*(st.t1-st.t0);
        for (li, l) in st.lines.iter().enumerate() {
            let xm = l.x_at(dtm);
            if xm > -0.21 && xm < -0.12 {
                println!("  line {li}: xm={:.6} speed={:.5} rec={:?}", xm, l.speed, l.rec);
            }
        }
    }
}
