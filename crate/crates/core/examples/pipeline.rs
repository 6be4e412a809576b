//! Times the reduction pipeline on an odometer block cover.
//!
//! usage: pipeline P DIM DEPTH COLORS K

use std::time::Instant;

use dadcert::covers::{block_cover, certify, reduce_cover_with, scale_schedule, PipelineOptions, VerifyOptions};
use dadcert::systems::System;
use dadcert::Subset;

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let [p, dim, depth, colors, k] = args[..] else {
        eprintln!("usage: pipeline P DIM DEPTH COLORS K");
        std::process::exit(2);
    };
    let (dim, colors) = (dim as usize, colors as usize);
    let s = System::odometer(p as i64, dim);
    let f0 = Subset::ball(dim, k);
    let sched = scale_schedule(colors - 1, &f0).expect("schedule");
    println!("radii {:?}", sched.radii().expect("radii"));
    let t = Instant::now();
    let input = block_cover(&s, depth as u32, colors, &sched.f[colors - 1]).expect("block cover");
    let v = match certify(input, VerifyOptions::compact()) {
        Ok(v) => v,
        Err(e) => {
            println!("input rejected after {:?}: {e}", t.elapsed());
            return;
        }
    };
    println!("input verified in {:?}", t.elapsed());
    match reduce_cover_with(&v, &f0, PipelineOptions { witnesses: false }) {
        Ok(out) => println!("pipeline {:?}: {}", t.elapsed(), if out.certificate().all_passed() { "pass" } else { "fail" }),
        Err(e) => println!("pipeline {:?}: {e}", t.elapsed()),
    }
}
