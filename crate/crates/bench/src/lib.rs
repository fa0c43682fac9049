// SPDX-License-Identifier: MIT OR Apache-2.0

//! Criterion benchmarks for the forward pass, BPTT, integrated gradients and
//! LRP. Run with `cargo bench -p whitebox-bench`.
