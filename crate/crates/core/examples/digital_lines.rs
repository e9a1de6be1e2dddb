//! Digital lines: the strips of one direction tile the plane, and a square
//! admits as many wedge splits as there are distinct bipartitions.
//!
//! `cargo run --release --example digital_lines`

use potts::wedgelet::{directions, enumerate_wedge_splits, digital_line_pixels, DigitalLineSpec, DyadicSquare, LineAngle, FULL_BUDGET};
use potts::count_fragments_2d;

fn main() -> potts::Result<()> {
    let square = DyadicSquare::root(8)?;
    let dir = directions(8).into_iter().find(|d| (d.p, d.q) == (3, 1)).expect("(3, 1) has max 3 <= 8");
    println!("direction ({}, {}), theta = {:.4}; line numbers on an 8x8 square:", dir.p, dir.q, dir.theta());
    for y in (0..8).rev() {
        let row: Vec<String> = (0..8).map(|x| format!("{:>3}", dir.line_number(x, y))).collect();
        println!("  {}", row.join(""));
    }
    let spec = DigitalLineSpec::new(LineAngle::Rational(dir), 2)?;
    println!("L^2 pixels: {:?}", digital_line_pixels(&spec, &square));

    for side in [2usize, 4, 8, 16] {
        let sq = DyadicSquare::root(side)?;
        let dirs = directions(side).len();
        let splits = enumerate_wedge_splits(&sq, FULL_BUDGET).len();
        println!("side {side:>2}: {dirs:>4} directions, {splits:>6} distinct wedge splits");
    }
    for n in [4usize, 8, 16, 32] {
        let c = count_fragments_2d(n, FULL_BUDGET)?;
        println!("|R^{n}| = {c} (|R|/n^4 = {:.3})", c as f64 / (n as f64).powi(4));
    }
    Ok(())
}
