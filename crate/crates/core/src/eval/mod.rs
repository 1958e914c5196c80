pub mod ipt;
pub mod iso;
pub mod workload;
