pub mod equivalence;
pub mod imaging;
pub mod lsd;
pub mod numeric;
pub mod polygon;
pub mod score;
pub mod square_detect;
