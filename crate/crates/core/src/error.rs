use std::path::PathBuf;

/// Every failure the pipeline can report.
///
/// The CLI prints [`Error::name`] on stderr so scripts can match on it.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("topology: {0}")]
    Topology(String),
    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),
    #[error("mesh edge graph is disconnected")]
    DisconnectedMesh,
    #[error("requested {requested} samples but only {available} candidates exist")]
    TooManySamples { requested: usize, available: usize },
    #[error("empty sample set")]
    EmptySampleSet,
    #[error("mesh is not disk-type: {0}")]
    NonDiskTopology(String),
    #[error("linear system is singular: {0}")]
    SingularSystem(String),
    #[error("conjugate integration failed: closed-loop residual {residual:e} exceeds {tolerance:e}")]
    NonHarmonicInput { residual: f64, tolerance: f64 },
    #[error("map is in the wrong stage: {0}")]
    WrongStage(&'static str),
    #[error("image of face {0} has zero area")]
    ZeroImageArea(usize),
    #[error("TPS centers are collinear")]
    CollinearCenters,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point {0} lies outside the unit disk")]
    OutsideDisk(num_complex::Complex64),
    #[error("quadrature too coarse: {0} nodes (need at least 7)")]
    QuadratureTooCoarse(usize),
    #[error("density evaluation failed: {0}")]
    DensityEval(String),
    #[error("mass totals differ: {0} vs {1}")]
    InfeasibleMasses(f64, f64),
    #[error("network simplex failed: {0}")]
    SolverFailure(String),
    #[error("mass fraction {0} out of range")]
    QOutOfRange(f64),
    #[error("plan is not a vertex: entry ({0},{1}) = {2:e}")]
    NonVertexPlan(usize, usize, f64),
    #[error("sample {0} has an empty Voronoi cell")]
    EmptyCell(usize),
    #[error("duplicate points in circle triplet")]
    DuplicatePoints,
    #[error("circle crosses the puncture")]
    PunctureCrossing,
    #[error("no candidate circle within tolerance for sample {0}")]
    NoCandidate(usize),
    #[error("center lies outside the circle")]
    OutsideCircle,
    #[error("no argmin rotation stored for ({0},{1})")]
    MissingArgmin(usize, usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "ParseError",
            Error::Topology(_) => "TopologyError",
            Error::DegenerateMesh(_) => "DegenerateMesh",
            Error::DisconnectedMesh => "DisconnectedMesh",
            Error::TooManySamples { .. } => "TooManySamples",
            Error::EmptySampleSet => "EmptySampleSet",
            Error::NonDiskTopology(_) => "NonDiskTopology",
            Error::SingularSystem(_) => "SingularSystem",
            Error::NonHarmonicInput { .. } => "NonHarmonicInput",
            Error::WrongStage(_) => "WrongStage",
            Error::ZeroImageArea(_) => "ZeroImageArea",
            Error::CollinearCenters => "CollinearCenters",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::OutsideDisk(_) => "OutsideDisk",
            Error::QuadratureTooCoarse(_) => "QuadratureTooCoarse",
            Error::DensityEval(_) => "DensityEvalError",
            Error::InfeasibleMasses(..) => "InfeasibleMasses",
            Error::SolverFailure(_) => "SolverFailure",
            Error::QOutOfRange(_) => "QOutOfRange",
            Error::NonVertexPlan(..) => "NonVertexPlan",
            Error::EmptyCell(_) => "EmptyCell",
            Error::DuplicatePoints => "DuplicatePoints",
            Error::PunctureCrossing => "PunctureCrossing",
            Error::NoCandidate(_) => "NoCandidate",
            Error::OutsideCircle => "OutsideCircle",
            Error::MissingArgmin(..) => "MissingArgmin",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::Io(_) => "IoError",
            Error::Json(_) => "JsonError",
            Error::Csv(_) => "CsvError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
