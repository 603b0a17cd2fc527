use thiserror::Error;

use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("vertex coordinates must be finite")]
    NonFinite,
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is not simple: edges {0} and {1} intersect")]
    NotSimple(usize, usize),
    #[error("polygon is clockwise; reverse the vertex order")]
    WrongOrientation,
    #[error("polygon has (near) zero area")]
    DegenerateArea,
    #[error("bad quad-vertex indices: {0}")]
    BadQuadIndices(String),
    #[error("point {0} lies outside the polygon")]
    OutsidePolygon(Point),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MedialAxisError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("medial axis is not a tree: {nodes} nodes, {edges} edges, {components} components")]
    NotATree {
        nodes: usize,
        edges: usize,
        components: usize,
    },
    #[error("nodes {0} and {1} are not connected")]
    Disconnected(usize, usize),
    #[error("path endpoints must differ")]
    SameEndpoints,
    #[error("no medial-axis tip at quad-vertex {0}")]
    MissingTip(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TridiskError {
    #[error("quad-vertex v{0} is not convex; approximate the quadrilateral first")]
    ReflexQuadVertex(usize),
    #[error("sweep found no disk touching three sides: {0}")]
    SweepFailure(String),
    #[error("no grid point qualifies; refine the grid")]
    NoneFound,
    #[error("grid size must be at least 16, got {0}")]
    GridTooSmall(usize),
    #[error(transparent)]
    MedialAxis(#[from] MedialAxisError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModulusError {
    #[error("raster too coarse: {0}")]
    RasterTooCoarse(String),
    #[error("grid spacing {h} exceeds diam/32 = {max}")]
    SpacingTooLarge { h: f64, max: f64 },
    #[error("conjugate-gradient solve did not converge (residual {0:e})")]
    NoConvergence(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("internal distances must be positive (s_a = {0}, s_b = {1})")]
    NonPositiveDistance(f64, f64),
    #[error("K must be at least 1, got {0}")]
    BadK(f64),
    #[error("L(K) is not representable as a double for K = {0}")]
    Overflow(f64),
    #[error("modulus {modulus} outside [1/K, K] for K = {k}")]
    ModulusOutOfRange { modulus: f64, k: f64 },
    #[error(transparent)]
    Modulus(#[from] ModulusError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApproximationError {
    #[error("inset at margin {margin} collapses: {reason}")]
    InsetCollapse { margin: f64, reason: String },
    #[error("levels {0} and {1} are not nested")]
    NotNested(usize, usize),
    #[error("side {side} distance increased from level {level} to {next}")]
    SideDistanceIncreased {
        side: crate::geometry::SideLabel,
        level: usize,
        next: usize,
    },
    #[error("need at least {0} levels")]
    TooFewLevels(usize),
    #[error("contact triples cannot be aligned across levels")]
    LabelMismatch,
    #[error("limit disk fails at the target: {0}")]
    LimitInvalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Modulus(#[from] ModulusError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InputError {
    #[error("cannot parse quadrilateral file: {0}")]
    Parse(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
