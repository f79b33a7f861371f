use carnot::curvature::CurvatureError;
use carnot::groups::GroupError;
use carnot::hamiltonian::FlowError;
use carnot::oracle::OracleError;
use carnot::regularity::RegularityError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("integrator: {0}")]
    Integrator(String),
    #[error("{0}")]
    NotAmpleEquiregular(String),
    #[error("{0}")]
    Singular(String),
    #[error("verification could not complete: {0}")]
    Oracle(String),
    #[error("verification failed: {failed} of {total} checks")]
    VerifyFailed { failed: usize, total: usize },
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Integrator(_) => 3,
            CliError::NotAmpleEquiregular(_) => 4,
            CliError::Singular(_) => 5,
            CliError::Oracle(_) | CliError::VerifyFailed { .. } => 6,
        }
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> Self {
        match e {
            GroupError::SingularFrame => CliError::Singular(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::Group(g) => g.into(),
            FlowError::InvalidParameters(m) => CliError::Usage(m),
            e => CliError::Integrator(e.to_string()),
        }
    }
}

impl From<CurvatureError> for CliError {
    fn from(e: CurvatureError) -> Self {
        match e {
            CurvatureError::SingularCovector { .. } => CliError::Singular(e.to_string()),
            CurvatureError::NotAmpleEquiregular(_) => CliError::NotAmpleEquiregular(e.to_string()),
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl From<RegularityError> for CliError {
    fn from(e: RegularityError) -> Self {
        match e {
            RegularityError::Flow(f) => f.into(),
            RegularityError::NotAmple => CliError::NotAmpleEquiregular(e.to_string()),
            e => CliError::Integrator(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Flow(f) => f.into(),
            OracleError::Curvature(c) => c.into(),
            OracleError::SingularCovector(_) => CliError::Singular(e.to_string()),
            OracleError::NotAmpleEquiregular => CliError::NotAmpleEquiregular(e.to_string()),
            OracleError::ShootingDiverged { .. } => CliError::Integrator(e.to_string()),
            OracleError::UnsupportedGroup(_) => CliError::Usage(e.to_string()),
            e => CliError::Oracle(e.to_string()),
        }
    }
}
