use std::time::Instant;

use washsim_core::{Machine, MachineConfig};

fn main() {
    let mut m = Machine::new(&MachineConfig::default()).unwrap();
    let t = Instant::now();
    let mut frames = 0;
    for _ in 0..5_000_000 {
        if m.step().unwrap().frame.is_some() {
            frames += 1;
        }
    }
    let dt = t.elapsed();
    println!("5M cycles, {frames} frames in {dt:?} ({:.1} Mcycles/s)", 5.0 / dt.as_secs_f64());
}
