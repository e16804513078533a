pub mod eval;
pub mod gen_data;
pub mod generalize;
pub mod train;
