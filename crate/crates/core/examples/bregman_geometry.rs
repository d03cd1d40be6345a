//! Prox steps and Bregman divergences under the Euclidean and entropic setups.

use saddlepoint::{FeasibleBlock, Geometry, ProductSet};

fn main() -> saddlepoint::Result<()> {
    let set = ProductSet::two_player(FeasibleBlock::simplex(3)?, FeasibleBlock::ball(vec![0.0, 0.0], 1.0)?)?;
    let x = [0.5, 0.3, 0.2, 0.1, -0.2];
    let p = [0.2, 0.2, 0.6, 0.4, 0.4];
    let y = [1.0, -0.5, 0.0, 3.0, 0.5];

    for geometry in [Geometry::euclidean(set.clone()), Geometry::entropic(set.clone())] {
        let next = geometry.prox(&x, &y)?;
        println!("{} (modulus {})", geometry.name(), geometry.modulus());
        println!("  prox_x(y)   = {:.5?}", next.0);
        println!("  D(p, x)     = {:.6}", geometry.bregman(&p, &x)?);
        println!("  D(p, x⁺)    = {:.6}", geometry.bregman(&p, &next)?);
        // three-point identity: D(p,x⁺) = D(p,x) + D(x,x⁺) + ⟨∇h(x) − ∇h(x⁺), p − x⟩
        let (gx, gn) = (geometry.grad_dgf(&x)?, geometry.grad_dgf(&next)?);
        let cross: f64 = (0..x.len()).map(|i| (gx[i] - gn[i]) * (p[i] - x[i])).sum();
        let rhs = geometry.bregman(&p, &x)? + geometry.bregman(&x, &next)? + cross;
        println!("  three-point residual = {:.2e}", geometry.bregman(&p, &next)? - rhs);
    }
    Ok(())
}
