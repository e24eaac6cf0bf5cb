use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("inverse of zero (or of a zero divisor)")]
    ZeroInverse,
    #[error("Galois action references radical `{0}` absent from the tower")]
    ActionMismatch(String),
    #[error("value does not lie in the base field of the extension")]
    NotInExtension,
    #[error("elements belong to different towers")]
    TowerMismatch,
    #[error("xi must be nonzero")]
    ZeroXi,
    #[error("extension must be cyclic of degree 3, got {0}")]
    BadExtension(String),
    #[error("surfaces are defined over different extensions")]
    ExtensionMismatch,
    #[error("components do not form one orbit of the twisted Galois action: {0}")]
    NotAnOrbit(String),
    #[error("a closed point on a non-trivial surface has degree divisible by 3, got {0}")]
    BadDegree(usize),
    #[error("the components are collinear")]
    Collinear,
    #[error("points have different splitting fields")]
    SplittingFieldMismatch,
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("xi is a cube in the base field")]
    XiIsCube,
    #[error("alpha is a square in the base field")]
    AlphaIsSquare,
    #[error("composition is identically zero")]
    IdenticallyZero,
    #[error("the base locus is not finite")]
    NonFiniteBaseLocus,
    #[error("no equivariant basis found: {0}")]
    EquivariantBasisNotFound(String),
    #[error("points are in special position: {0}")]
    SpecialPosition(String),
    #[error("lambda is a cube in the base field")]
    LambdaIsCube,
    #[error("identity `{check}` fails with residue {residue}")]
    IdentityFails { check: String, residue: String },
    #[error("the tower is degenerate: {0}")]
    DegenerateTower(String),
    #[error("xi = 27*lambda*mu + nu^3 vanishes")]
    XiZero,
    #[error("no section of the contraction found")]
    SectionNotFound,
    #[error("cannot classify point: {0}")]
    UnclassifiablePoint(String),
    #[error("chain is not composable at position {0}")]
    NotComposable(usize),
    #[error("degenerate pair of points: {0}")]
    DegeneratePair(String),
    #[error("e = {0} < 1")]
    SmallE(i64),
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
