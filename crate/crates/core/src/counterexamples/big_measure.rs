use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{precondition, Error, Result};
use crate::sets::{dyadic_decompose, exact, fat_cantor_build, CantorLikeSet, DyadicCube, ObstacleSet, OpenBox};

/// Levels beyond `max_level` tried before giving up on reaching `lambda0`.
const EXTRA_LEVELS: u32 = 24;

/// Finite union of fat Cantor products inside maximal dyadic cubes.
#[derive(Debug, Clone)]
pub struct BigMeasureObstacle {
    pub obstacle: ObstacleSet,
    /// Exact Lebesgue measure of the union.
    pub measure: BigRational,
    /// The cubes that carry a product, with the factor sets used in each.
    pub pieces: Vec<(DyadicCube, Vec<CantorLikeSet>)>,
    /// Dyadic level actually used.
    pub level: u32,
}

/// A compact subset of `bounds` with measure strictly above `lambda0` that is a
/// finite union of products `C_1 x C_2` of fat Cantor sets, one per selected
/// dyadic cube. Planar boxes only.
///
/// Cubes are taken largest first until their volume `lambda_1` exceeds
/// `lambda0`; each cube `Q` of side `a` then receives a product of measure
/// `(a - delta)^2 > (lambda0 / lambda_1) vol(Q)` with
/// `delta = min(a / 3, (a - sqrt(lambda_Q)) / 3)`, built on `I' = [lo + delta/4, hi - delta/4]`.
pub fn big_measure_obstacle(bounds: &OpenBox, lambda0: f64, max_level: u32) -> Result<BigMeasureObstacle> {
    if bounds.dim() != 2 {
        return Err(precondition("the fat Cantor product obstacle is built for planar boxes only"));
    }
    if !lambda0.is_finite() {
        return Err(precondition("lambda0 must be finite"));
    }
    if lambda0 < 0.0 {
        return Ok(BigMeasureObstacle {
            obstacle: ObstacleSet::empty(),
            measure: BigRational::zero(),
            pieces: Vec::new(),
            level: 0,
        });
    }
    let volume: BigRational = (0..2).map(|a| exact(bounds.hi(a)) - exact(bounds.lo(a))).product();
    let target = exact(lambda0);
    if target >= volume {
        return Err(Error::Infeasible(format!(
            "lambda0 = {lambda0} is not below the box volume {}",
            volume.to_f64().unwrap_or(f64::NAN)
        )));
    }

    let (cubes, level) = (max_level..=max_level + EXTRA_LEVELS)
        .map(|level| (dyadic_decompose(bounds, level), level))
        .find(|(d, _)| d.measure() > target)
        .map(|(d, level)| (d.cubes, level))
        .ok_or_else(|| Error::Infeasible(format!("dyadic cubes up to level {} do not exceed {lambda0}", max_level + EXTRA_LEVELS)))?;

    let mut selected = Vec::new();
    let mut lambda1 = BigRational::zero();
    for c in cubes {
        if lambda1 > target {
            break;
        }
        lambda1 += c.volume();
        selected.push(c);
    }
    let ratio = &target / &lambda1;

    let mut pieces = Vec::with_capacity(selected.len());
    let mut parts = Vec::with_capacity(selected.len());
    let mut measure = BigRational::zero();
    for cube in selected {
        let lambda_q = &ratio * cube.volume();
        let (sets, m) = cube_product(&cube, &lambda_q)?;
        parts.push(ObstacleSet::product2(sets[0].clone(), sets[1].clone())?);
        measure += m;
        pieces.push((cube, sets));
    }
    debug_assert!(measure > target);
    Ok(BigMeasureObstacle {
        obstacle: ObstacleSet::Union(parts),
        measure,
        pieces,
        level,
    })
}

/// Fat Cantor factors inside `cube` whose product measure exceeds `lambda_q`.
fn cube_product(cube: &DyadicCube, lambda_q: &BigRational) -> Result<(Vec<CantorLikeSet>, BigRational)> {
    let a = cube.side();
    let n = cube.corner.len() as i32;
    let root = lambda_q.to_f64().unwrap_or(0.0).max(0.0).powf(1.0 / n as f64);
    let mut delta = (a / 3.0).min((a - root) / 3.0);
    let (lo, hi) = (cube.lo(), cube.hi());
    // Floating-point choice of delta; halve until the exact product clears lambda_q.
    for _ in 0..64 {
        if delta <= 0.0 {
            break;
        }
        let sets = (0..n as usize)
            .map(|i| {
                let ambient = (lo[i] + delta / 4.0, hi[i] - delta / 4.0);
                fat_cantor_build(ambient, (ambient.1 - ambient.0) - delta)
            })
            .collect::<Result<Vec<_>>>()?;
        let m: BigRational = sets.iter().map(|c| c.measure()).product();
        if &m > lambda_q {
            return Ok((sets, m));
        }
        delta *= 0.5;
    }
    Err(Error::Numeric(format!("no admissible delta for cube {cube:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{complement_components, Grid};

    #[test]
    fn unit_square_half() {
        let b = big_measure_obstacle(&OpenBox::unit(2), 0.5, 2).unwrap();
        assert!(b.measure > exact(0.5));
        let sum: BigRational = b.pieces.iter().map(|(_, s)| s[0].measure() * s[1].measure()).sum();
        assert_eq!(sum, b.measure);
    }

    #[test]
    fn negative_lambda_gives_empty_set() {
        let b = big_measure_obstacle(&OpenBox::unit(2), -1.0, 3).unwrap();
        assert!(b.obstacle.is_empty_descriptor());
        assert!(b.measure.is_zero());
    }

    #[test]
    fn volume_is_infeasible() {
        assert!(matches!(big_measure_obstacle(&OpenBox::unit(2), 1.0, 3), Err(Error::Infeasible(_))));
    }

    #[test]
    fn wide_box_uses_several_cubes_and_stays_connected() {
        let bounds = OpenBox::new(vec![(0.0, 2.0), (0.0, 1.0)]).unwrap();
        let b = big_measure_obstacle(&bounds, 1.2, 0).unwrap();
        assert!(b.pieces.len() >= 2);
        assert!(b.measure > exact(1.2));
        let grid = Grid::uniform(bounds, 64).unwrap();
        assert_eq!(complement_components(&grid, &b.obstacle, 30).count, 1);
    }
}
