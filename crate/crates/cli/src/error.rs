use conewright::abelian::FormError;
use conewright::cutoff::CutoffError;
use conewright::develop::DevelopError;
use conewright::flatten::FlattenError;
use conewright::mesh::MeshError;
use conewright::series::SeriesError;
use thiserror::Error;

/// A failed run, classified by exit code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Failure {
    /// Cone angles violate Gauss–Bonnet.
    #[error("{0}")]
    Admissibility(String),
    #[error("{0}")]
    Numerical(String),
    /// Missing or malformed input, or an unwritable output.
    #[error("{0}")]
    Input(String),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_ADMISSIBILITY: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Admissibility(_) => EXIT_ADMISSIBILITY,
            Failure::Numerical(_) => EXIT_NUMERICAL,
            Failure::Input(_) => EXIT_INPUT,
        }
    }
}

/// Mesh errors met while loading are input errors.
impl From<MeshError> for Failure {
    fn from(e: MeshError) -> Self {
        Failure::Input(format!("mesh: {e}"))
    }
}

impl From<FlattenError> for Failure {
    fn from(e: FlattenError) -> Self {
        let msg = format!("flatten: {e}");
        match e {
            FlattenError::Inadmissible { .. } | FlattenError::NotMarked { .. } => {
                Failure::Admissibility(msg)
            }
            FlattenError::UnknownVertex { .. } | FlattenError::DuplicateCone { .. } => {
                Failure::Input(msg)
            }
            _ => Failure::Numerical(msg),
        }
    }
}

impl From<SeriesError> for Failure {
    fn from(e: SeriesError) -> Self {
        let msg = format!("normal form: {e}");
        match e {
            SeriesError::Format(_) | SeriesError::BadOrder(_) | SeriesError::Domain(_) => {
                Failure::Input(msg)
            }
            _ => Failure::Numerical(msg),
        }
    }
}

impl From<FormError> for Failure {
    fn from(e: FormError) -> Self {
        let msg = format!("abelian: {e}");
        match e {
            FormError::Roots(_) => Failure::Numerical(msg),
            _ => Failure::Input(msg),
        }
    }
}

impl From<DevelopError> for Failure {
    fn from(e: DevelopError) -> Self {
        let msg = format!("develop: {e}");
        match e {
            DevelopError::Mesh(_)
            | DevelopError::BadBaseFace { .. }
            | DevelopError::BadVertex(_)
            | DevelopError::Io(_) => Failure::Input(msg),
            _ => Failure::Numerical(msg),
        }
    }
}

impl From<CutoffError> for Failure {
    fn from(e: CutoffError) -> Self {
        Failure::Numerical(format!("cutoff: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use conewright::poly::PolyError;

    #[test]
    fn exit_codes() {
        let inadmissible = FlattenError::Inadmissible { total: 0.0, required: 1.0, cones: 1, chi: 2 };
        assert_eq!(Failure::from(inadmissible).exit_code(), EXIT_ADMISSIBILITY);
        let stuck = FlattenError::NoConvergence { iterations: 50, residual: 1.0 };
        assert_eq!(Failure::from(stuck).exit_code(), EXIT_NUMERICAL);
        assert_eq!(Failure::from(MeshError::Io("x".into())).exit_code(), EXIT_INPUT);
        assert_eq!(Failure::from(SeriesError::Format("x".into())).exit_code(), EXIT_INPUT);
        assert_eq!(Failure::from(SeriesError::LogOfZero).exit_code(), EXIT_NUMERICAL);
        assert_eq!(Failure::from(FormError::ZeroDenominator).exit_code(), EXIT_INPUT);
        assert_eq!(Failure::from(FormError::Roots(PolyError::NonFinite)).exit_code(), EXIT_NUMERICAL);
        assert_eq!(Failure::from(DevelopError::EmptyLoop).exit_code(), EXIT_NUMERICAL);
        assert_eq!(Failure::from(DevelopError::BadBaseFace { face: 9, faces: 4 }).exit_code(), EXIT_INPUT);
    }
}
