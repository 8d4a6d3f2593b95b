use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_rational::BigRational;

use super::big_measure::big_measure_obstacle;
use super::functions::{bump, bump_derivative, step_g, step_g_derivative, step_h, step_h_derivative};
use crate::connection::{ConnectionForm, FormComponent, SampledSection, Smoothness};
use crate::error::{precondition, Result};
use crate::extension::{Tolerances, Verdict};
use crate::sets::{
    cantor_function, fat_cantor_build, CantorLikeSet, Grid, HalfSlab, ObstacleSet, OpenBox, SideConstraint,
    DEFAULT_DEPTH,
};

/// Closed-form section; `None` where it is not defined.
pub type SectionFn = Arc<dyn Fn(&[f64]) -> Option<Vec<f64>> + Send + Sync>;

/// Names accepted by [`scenario`].
pub const REGISTRY: &[&str] = &[
    "standard",
    "noextension",
    "cantor-c0",
    "fat-cantor-box",
    "big-measure",
    "hyperplane-patch",
    "full-hyperplane",
    "constant-form",
];

/// Coefficients of the constant rank-1 form `c_1 dx^1 + c_2 dx^2`.
pub const CONSTANT_FORM: [f64; 2] = [0.3, -0.7];

/// What a run on the scenario should observe besides the verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum ExpectedEvidence {
    None,
    /// Jump of the section across `axis` at `base`.
    Jump { axis: usize, base: Vec<f64>, magnitude: f64 },
    /// Difference quotients along `axis` diverge at `points` and settle at `probes`.
    Divergent {
        axis: usize,
        points: Vec<Vec<f64>>,
        probes: Vec<Vec<f64>>,
    },
    /// The scan leaves every obstacle node unreached.
    Frontier,
}

#[derive(Clone)]
pub struct NamedScenario {
    pub name: String,
    pub dim: usize,
    pub connection: ConnectionForm,
    pub section: SectionFn,
    pub obstacle: ObstacleSet,
    pub expected: Verdict,
    pub evidence: ExpectedEvidence,
    /// Tolerances the scenario's grid runs are calibrated for.
    pub tolerances: Tolerances,
    /// Exact Lebesgue measure of the obstacle, when known.
    pub obstacle_measure: Option<BigRational>,
}

impl fmt::Debug for NamedScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NamedScenario")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("connection", &self.connection)
            .field("obstacle", &self.obstacle)
            .field("expected", &self.expected)
            .field("evidence", &self.evidence)
            .finish_non_exhaustive()
    }
}

impl NamedScenario {
    pub fn bounds(&self) -> &OpenBox {
        self.connection.domain()
    }

    pub fn rank(&self) -> usize {
        self.connection.rank()
    }

    pub fn eval(&self, x: &[f64]) -> Option<Vec<f64>> {
        (self.section)(x)
    }

    /// Uniform grid with `res` cells per axis over the scenario box.
    pub fn grid(&self, res: usize) -> Result<Grid> {
        Grid::uniform(self.bounds().clone(), res)
    }

    /// The section sampled on `grid`, undefined on nodes whose cells meet `F`.
    pub fn sample(&self, grid: &Grid) -> Result<SampledSection> {
        let f = &self.section;
        SampledSection::off_obstacle(grid.clone(), self.rank(), &self.obstacle, self.tolerances.depth, |x| f(x))
    }

    /// Same scenario on a sub-box.
    pub fn restrict(&self, sub: &OpenBox) -> Result<Self> {
        Ok(Self {
            connection: self.connection.restrict(sub)?,
            ..self.clone()
        })
    }
}

fn scalar(v: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, v)
}

fn component(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> FormComponent {
    Arc::new(move |x| scalar(f(x)))
}

fn tolerances(residual: f64, input: f64) -> Tolerances {
    Tolerances {
        residual,
        input,
        ..Tolerances::default()
    }
}

/// Looks up a registry entry; `dim` overrides the dimension where the scenario allows it.
pub fn scenario(name: &str, dim: Option<usize>) -> Result<NamedScenario> {
    let fixed = |n: usize| match dim {
        Some(d) if d != n => Err(precondition(format!("scenario {name} is only defined for n = {n}"))),
        _ => Ok(()),
    };
    match name {
        "standard" => standard_scenario(dim.unwrap_or(2)),
        "noextension" => noextension_scenario(dim.unwrap_or(2)),
        "cantor-c0" => cantor_c0_scenario(dim.unwrap_or(2)),
        "fat-cantor-box" => fixed(2).and_then(|_| fat_cantor_box_scenario()),
        "big-measure" => fixed(2).and_then(|_| big_measure_scenario()),
        "hyperplane-patch" => fixed(2).and_then(|_| hyperplane_patch_scenario()),
        "full-hyperplane" => fixed(2).and_then(|_| full_hyperplane_scenario()),
        "constant-form" => fixed(2).and_then(|_| constant_form_scenario()),
        _ => Err(precondition(format!(
            "unknown scenario {name:?}; known scenarios: {}",
            REGISTRY.join(", ")
        ))),
    }
}

/// Standard connection on `(0, 1)^n`, constant section, across the discrete
/// half-slab `{x_1 >= 1/2, x_2 = 1/2}`.
pub fn standard_scenario(n: usize) -> Result<NamedScenario> {
    if n < 2 {
        return Err(precondition("the standard scenario needs n >= 2"));
    }
    let slab = HalfSlab::new(0.5, 0, 1, CantorLikeSet::discrete(vec![0.5])?)?;
    Ok(NamedScenario {
        name: "standard".into(),
        dim: n,
        connection: ConnectionForm::standard(OpenBox::unit(n), 1)?,
        section: Arc::new(|_| Some(vec![1.0])),
        obstacle: ObstacleSet::half_slab(slab),
        expected: Verdict::Extended,
        evidence: ExpectedEvidence::None,
        tolerances: Tolerances::default(),
        obstacle_measure: Some(BigRational::from_integer(0.into())),
    })
}

/// `f(x) = b(x_1) ... b(x_{n-1}) h(x_n)`.
pub fn noextension_f(x: &[f64]) -> f64 {
    let n = x.len();
    x[..n - 1].iter().map(|&v| bump(v)).product::<f64>() * step_h(x[n - 1])
}

/// `D_i f`.
pub fn noextension_df(x: &[f64], i: usize) -> f64 {
    let n = x.len();
    let others: f64 = x[..n - 1]
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, &v)| bump(v))
        .product();
    if i + 1 == n {
        others * step_h_derivative(x[n - 1])
    } else {
        others * bump_derivative(x[i]) * step_h(x[n - 1])
    }
}

/// `Q = [-1, 1]^{n-1} x [-1, 0]`.
pub fn noextension_q(n: usize) -> ObstacleSet {
    let mut iv = vec![(-1.0, 1.0); n - 1];
    iv.push((-1.0, 0.0));
    ObstacleSet::ClosedBox(iv)
}

/// Rank-1 connection on `(-3, 3)^n` with `omega_i = -g(x_n) D_i f / (1 + f)`
/// for `i < n` and `omega_n = -D_n f / (1 + f)`. The section equals 1 off `Q`
/// for `x_n <= 0` and `1 + f` for `x_n > 0`; it jumps by `b(0)^{n-1}` across
/// the top face of `Q`.
pub fn noextension_scenario(n: usize) -> Result<NamedScenario> {
    if n < 2 {
        return Err(precondition("the no-extension connection needs n >= 2"));
    }
    let components = (0..n)
        .map(|i| {
            component(move |x| {
                let w = -noextension_df(x, i) / (1.0 + noextension_f(x));
                if i + 1 == n {
                    w
                } else {
                    step_g(x[n - 1]) * w
                }
            })
        })
        .collect();
    let connection = ConnectionForm::new(OpenBox::cube(n, -3.0, 3.0)?, 1, components, Smoothness::CInf)?;
    let q = noextension_q(n);
    let q_section = q.clone();
    let section: SectionFn = Arc::new(move |x| {
        if q_section.contains(x, 0) {
            None
        } else if x[x.len() - 1] <= 0.0 {
            Some(vec![1.0])
        } else {
            Some(vec![1.0 + noextension_f(x)])
        }
    });
    Ok(NamedScenario {
        name: "noextension".into(),
        dim: n,
        connection,
        section,
        obstacle: q,
        expected: Verdict::Obstructed,
        evidence: ExpectedEvidence::Jump {
            axis: n - 1,
            base: vec![0.0; n],
            magnitude: (-((n - 1) as f64)).exp(),
        },
        tolerances: tolerances(0.1, 0.1),
        obstacle_measure: None,
    })
}

/// Cantor function extended by 0 on the left and 1 on the right.
pub fn cantor_g(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        cantor_function(x, DEFAULT_DEPTH)
    }
}

fn cantor_box(n: usize) -> Result<OpenBox> {
    let mut iv = vec![(-2.0, 2.0), (-1.0, 2.0)];
    iv.extend(std::iter::repeat_n((-1.0, 1.0), n - 2));
    OpenBox::new(iv)
}

fn cantor_slab() -> Result<ObstacleSet> {
    Ok(ObstacleSet::half_slab(HalfSlab::new(0.0, 0, 1, CantorLikeSet::ternary(0.0, 1.0)?)?))
}

fn padded(head: &[f64], n: usize) -> Vec<f64> {
    let mut v = head.to_vec();
    v.resize(n, 0.0);
    v
}

/// Rank-1 connection `omega_1 = -f'(x_1) g(x_2) / (1 + f(x_1) g(x_2))`, other
/// components zero, with `f(x) = x^2` for `x >= 0` (0 otherwise) and `g` the
/// Cantor function. It is only `C^0`; the section `1 + f g` is parallel off
/// `F = {x_1 >= 0, x_2 in C}` but not differentiable across it.
pub fn cantor_c0_scenario(n: usize) -> Result<NamedScenario> {
    if n < 2 {
        return Err(precondition("the Cantor connection needs n >= 2"));
    }
    let f = |x: f64| if x > 0.0 { x * x } else { 0.0 };
    let df = |x: f64| if x > 0.0 { 2.0 * x } else { 0.0 };
    let mut components = vec![component(move |x| {
        let g = cantor_g(x[1]);
        -df(x[0]) * g / (1.0 + f(x[0]) * g)
    })];
    components.extend((1..n).map(|_| component(|_| 0.0)));
    let connection = ConnectionForm::new(cantor_box(n)?, 1, components, Smoothness::C0)?;
    let points = [[0.5, 0.0], [0.5, 1.0 / 3.0], [1.0, 2.0 / 3.0], [1.0, 1.0], [1.5, 2.0 / 9.0]]
        .iter()
        .map(|p| padded(p, n))
        .collect();
    let probes = [[-1.0, 0.5], [0.5, 0.5], [1.0, 1.5], [1.5, -0.5]]
        .iter()
        .map(|p| padded(p, n))
        .collect();
    Ok(NamedScenario {
        name: "cantor-c0".into(),
        dim: n,
        connection,
        section: Arc::new(move |x| Some(vec![1.0 + f(x[0]) * cantor_g(x[1])])),
        obstacle: cantor_slab()?,
        expected: Verdict::Obstructed,
        evidence: ExpectedEvidence::Divergent { axis: 1, points, probes },
        tolerances: tolerances(0.02, 0.02),
        obstacle_measure: Some(BigRational::from_integer(0.into())),
    })
}

/// The Cantor geometry with `C^1` data: `f(x) = x^3 / 8` (`x >= 0`) and the smooth
/// step `k(x_2) = g(x_2)`, which is constant on `[0, 1]`. The form
/// `omega_i = -D_i(f k) / (1 + f k)` has `1 + f k` as a smooth parallel section. Extends.
pub fn cantor_c1_scenario(n: usize) -> Result<NamedScenario> {
    if n < 2 {
        return Err(precondition("the Cantor connection needs n >= 2"));
    }
    let f = |x: f64| if x > 0.0 { x * x * x / 8.0 } else { 0.0 };
    let df = |x: f64| if x > 0.0 { 3.0 * x * x / 8.0 } else { 0.0 };
    let mut components = vec![
        component(move |x| -df(x[0]) * step_g(x[1]) / (1.0 + f(x[0]) * step_g(x[1]))),
        component(move |x| -f(x[0]) * step_g_derivative(x[1]) / (1.0 + f(x[0]) * step_g(x[1]))),
    ];
    components.extend((2..n).map(|_| component(|_| 0.0)));
    let connection = ConnectionForm::new(cantor_box(n)?, 1, components, Smoothness::C1)?;
    Ok(NamedScenario {
        name: "cantor-c1".into(),
        dim: n,
        connection,
        section: Arc::new(move |x| Some(vec![1.0 + f(x[0]) * step_g(x[1])])),
        obstacle: cantor_slab()?,
        expected: Verdict::Extended,
        evidence: ExpectedEvidence::None,
        tolerances: tolerances(0.1, 0.1),
        obstacle_measure: Some(BigRational::from_integer(0.into())),
    })
}

/// `P(t) = (t - 1/2)|t - 1/2|`.
fn fat_p(t: f64) -> f64 {
    (t - 0.5) * (t - 0.5).abs()
}

/// `u = 1 + (P(x_1) + P(x_2)) / 2`, parallel for the `C^0` form `omega_i = -P'(x_i) / 2u`.
pub fn fat_cantor_u(x: &[f64]) -> f64 {
    1.0 + 0.5 * (fat_p(x[0]) + fat_p(x[1]))
}

/// Product of two fat Cantor sets of measure 3/8 each inside `(0, 1)^2`.
pub fn fat_cantor_product() -> Result<ObstacleSet> {
    let c = fat_cantor_build((0.25, 0.75), 0.25)?;
    ObstacleSet::product2(c.clone(), c)
}

pub fn fat_cantor_box_scenario() -> Result<NamedScenario> {
    let components = (0..2)
        .map(|i| component(move |x| -(x[i] - 0.5).abs() / fat_cantor_u(x)))
        .collect();
    let connection = ConnectionForm::new(OpenBox::unit(2), 1, components, Smoothness::C0)?;
    let obstacle = fat_cantor_product()?;
    let measure = match &obstacle {
        ObstacleSet::BiSlab(a, b) => Some(a.set.measure() * b.set.measure()),
        _ => None,
    };
    Ok(NamedScenario {
        name: "fat-cantor-box".into(),
        dim: 2,
        connection,
        section: Arc::new(|x| Some(vec![fat_cantor_u(x)])),
        obstacle,
        expected: Verdict::Extended,
        evidence: ExpectedEvidence::None,
        tolerances: tolerances(0.01, 0.01),
        obstacle_measure: measure,
    })
}

/// Level of the dyadic decomposition behind the big-measure scenario.
pub const BIG_MEASURE_LEVEL: u32 = 3;

pub fn big_measure_scenario() -> Result<NamedScenario> {
    let bounds = OpenBox::new(vec![(0.0, 2.0), (0.0, 1.0)])?;
    let big = big_measure_obstacle(&bounds, 1.2, BIG_MEASURE_LEVEL)?;
    Ok(NamedScenario {
        name: "big-measure".into(),
        dim: 2,
        connection: ConnectionForm::standard(bounds, 1)?,
        section: Arc::new(|_| Some(vec![1.0])),
        obstacle: big.obstacle,
        expected: Verdict::Extended,
        evidence: ExpectedEvidence::None,
        tolerances: Tolerances::default(),
        obstacle_measure: Some(big.measure),
    })
}

/// `exp(-c_1 x_1 - c_2 x_2)`, parallel for [`CONSTANT_FORM`].
pub fn constant_form_section(x: &[f64]) -> f64 {
    (-CONSTANT_FORM[0] * x[0] - CONSTANT_FORM[1] * x[1]).exp()
}

fn constant_form_connection() -> Result<ConnectionForm> {
    ConnectionForm::constant(OpenBox::unit(2), CONSTANT_FORM.iter().map(|&c| scalar(c)).collect())
}

/// Depth of the ternary set in the constant-form scenario.
pub const CONSTANT_FORM_DEPTH: u32 = 12;

pub fn constant_form_scenario() -> Result<NamedScenario> {
    let set = CantorLikeSet::ternary(0.0, 1.0)?.with_depth(CONSTANT_FORM_DEPTH);
    Ok(NamedScenario {
        name: "constant-form".into(),
        dim: 2,
        connection: constant_form_connection()?,
        section: Arc::new(|x| Some(vec![constant_form_section(x)])),
        obstacle: ObstacleSet::half_slab(HalfSlab::new(0.5, 0, 1, set)?),
        expected: Verdict::Extended,
        evidence: ExpectedEvidence::None,
        tolerances: Tolerances {
            depth: CONSTANT_FORM_DEPTH,
            ..Tolerances::default()
        },
        obstacle_measure: Some(BigRational::from_integer(0.into())),
    })
}

/// `{x_2 = level, x_1 >= bound}`: a half-line whose end lies inside the box.
pub fn hyperplane_patch(level: f64, bound: f64) -> ObstacleSet {
    ObstacleSet::HyperplanePatch {
        axis: 1,
        level,
        constraints: vec![SideConstraint::AtLeast { axis: 0, bound }],
    }
}

/// Patch of the patch scenarios inside `bounds`: at the middle of axis 2,
/// starting a quarter of the way along axis 1.
pub fn patch_for(bounds: &OpenBox) -> ObstacleSet {
    let (lo1, hi1) = bounds.interval(1);
    hyperplane_patch(0.5 * (lo1 + hi1), bounds.lo(0) + 0.25 * bounds.width(0))
}

pub fn hyperplane_patch_scenario() -> Result<NamedScenario> {
    let connection = constant_form_connection()?;
    let obstacle = patch_for(connection.domain());
    Ok(NamedScenario {
        name: "hyperplane-patch".into(),
        dim: 2,
        connection,
        section: Arc::new(|x| Some(vec![constant_form_section(x)])),
        obstacle,
        expected: Verdict::Extended,
        evidence: ExpectedEvidence::None,
        tolerances: tolerances(0.05, 0.05),
        obstacle_measure: Some(BigRational::from_integer(0.into())),
    })
}

/// Standard connection on `(0, 1)^2` cut by the full line `x_2 = 1/2`, with
/// different constants on the two sides.
pub fn full_hyperplane_scenario() -> Result<NamedScenario> {
    Ok(NamedScenario {
        name: "full-hyperplane".into(),
        dim: 2,
        connection: ConnectionForm::standard(OpenBox::unit(2), 1)?,
        section: Arc::new(|x| match x[1] {
            y if y < 0.5 => Some(vec![0.0]),
            y if y > 0.5 => Some(vec![1.0]),
            _ => None,
        }),
        obstacle: ObstacleSet::hyperplane(1, 0.5),
        expected: Verdict::Obstructed,
        evidence: ExpectedEvidence::Frontier,
        tolerances: Tolerances::default(),
        obstacle_measure: Some(BigRational::from_integer(0.into())),
    })
}

/// Every `C^0` registry connection on a sub-box where its section is parallel
/// everywhere, cut by a hyperplane patch with boundary inside the box.
pub fn hyperplane_patch_suite() -> Result<Vec<NamedScenario>> {
    let with_patch = |s: NamedScenario, sub: OpenBox, section: Option<SectionFn>, residual: f64| -> Result<NamedScenario> {
        let mut r = s.restrict(&sub)?;
        r.obstacle = patch_for(&sub);
        r.expected = Verdict::Extended;
        r.evidence = ExpectedEvidence::None;
        r.tolerances = tolerances(residual, residual);
        r.obstacle_measure = Some(BigRational::from_integer(0.into()));
        if let Some(f) = section {
            r.section = f;
        }
        Ok(r)
    };
    let noext_section: SectionFn = Arc::new(|x| Some(vec![1.0 + noextension_f(x)]));
    let cantor = cantor_c0_scenario(2)?;
    let cantor_section = cantor.section.clone();
    Ok(vec![
        with_patch(standard_scenario(2)?, OpenBox::unit(2), None, 1e-5)?,
        with_patch(
            noextension_scenario(2)?,
            OpenBox::new(vec![(-2.0, 2.0), (0.1, 2.0)])?,
            Some(noext_section),
            0.05,
        )?,
        with_patch(cantor, OpenBox::new(vec![(-2.0, 2.0), (0.4, 0.6)])?, Some(cantor_section), 0.05)?,
        with_patch(constant_form_scenario()?, OpenBox::unit(2), None, 1e-5)?,
        with_patch(fat_cantor_box_scenario()?, OpenBox::unit(2), None, 0.05)?,
    ])
}
