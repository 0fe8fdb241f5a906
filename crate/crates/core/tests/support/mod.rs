pub mod vertex_enum;
