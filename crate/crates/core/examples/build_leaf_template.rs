//! Regenerates `assets/arabidopsis_leaf.mesh`.
//!
//! The outline is a narrow petiole followed by a rounded spatulate blade; the
//! surface is lofted with a shallow midrib arch and upturned margins. Run with
//! `cargo run -p leafsynth --example build_leaf_template > crates/core/assets/arabidopsis_leaf.mesh`.

use std::f64::consts::PI;

const PETIOLE: f64 = 0.28;
const ROWS: usize = 36;
const COLS: usize = 10;

fn half_width(x: f64) -> f64 {
    if x < PETIOLE {
        0.025 + 0.015 * x / PETIOLE
    } else {
        let t = (x - PETIOLE) / (1.0 - PETIOLE);
        0.04 * (1.0 - t) + 0.30 * (PI * t.powf(0.65)).sin()
    }
}

fn height(x: f64, y: f64, w_max: f64) -> f64 {
    let t = ((x - PETIOLE) / (1.0 - PETIOLE)).clamp(0.0, 1.0);
    0.015 * (PI * t).sin() + 0.05 * (y / w_max).powi(2)
}

fn main() {
    let xs: Vec<f64> = (0..ROWS).map(|i| i as f64 / ROWS as f64).collect();
    let w_max = xs.iter().map(|&x| half_width(x)).fold(0.0, f64::max);
    println!("# Inspiration leaf: petiole base at origin, blade along +x, upper side +z.");
    println!("# {ROWS} stations x {} columns plus a tip vertex.", COLS + 1);
    let mut uvs = Vec::new();
    for &x in &xs {
        let w = half_width(x);
        for j in 0..=COLS {
            let s = -1.0 + 2.0 * j as f64 / COLS as f64;
            let y = s * w;
            println!("v {:.6} {:.6} {:.6}", x, y, height(x, y, w_max));
            uvs.push((x, 0.5 + y / (2.0 * w_max)));
        }
    }
    println!("v 1.000000 0.000000 {:.6}", height(1.0, 0.0, w_max));
    uvs.push((1.0, 0.5));
    for (u, v) in uvs {
        println!("vt {u:.6} {v:.6}");
    }
    let idx = |i: usize, j: usize| i * (COLS + 1) + j + 1;
    for i in 0..ROWS - 1 {
        for j in 0..COLS {
            println!("f {} {} {}", idx(i, j), idx(i + 1, j), idx(i + 1, j + 1));
            println!("f {} {} {}", idx(i, j), idx(i + 1, j + 1), idx(i, j + 1));
        }
    }
    let tip = ROWS * (COLS + 1) + 1;
    for j in 0..COLS {
        println!("f {} {} {}", idx(ROWS - 1, j), tip, idx(ROWS - 1, j + 1));
    }
}
