pub mod error;
pub mod fdist;
pub mod lasso;
pub mod model;
