pub mod cmat;
pub mod fits;
pub mod optimize;
pub mod quad;
pub mod roots;
