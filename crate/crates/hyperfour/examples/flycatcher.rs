//! Fly-catcher orbits, heights and their average along horizontal lines.

use hyperfour::halfplane::{
    average_height, average_height_leading, flycatcher_height, reduce_to_tile, HPoint,
};

fn main() -> hyperfour::Result<()> {
    for (re, im) in [(0.0, 2.0), (0.0, 0.5), (0.1, 0.01), (0.37, 0.001)] {
        let tau = HPoint::from_parts(re, im)?;
        let h = flycatcher_height(tau)?;
        println!(
            "tau = {tau}: height {} (bound {:.1}), orbit ends at {}",
            h.n,
            0.5 + 0.5 / im,
            h.orbit.last().unwrap()
        );
        let tile = reduce_to_tile(tau)?;
        println!("  tile word {} maps {} back to tau", tile.gamma, tile.tau0);
    }

    println!("{:>8} {:>12} {:>12}", "y", "mean height", "log^2(1/y)/pi^2");
    for y in [1e-2, 1e-3, 1e-4, 1e-5] {
        println!(
            "{y:>8.0e} {:>12.4} {:>12.4}",
            average_height(y, 4096)?,
            average_height_leading(y)
        );
    }
    Ok(())
}
