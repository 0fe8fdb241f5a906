use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use qmetro_bench::fixture;
use qmetro_core::design::{average_case, worst_case};
use qmetro_core::fisher::qfi_table;
use qmetro_core::lp::solve_minimax;

fn table(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_table");
    for n_cfg in [5, 10, 20] {
        let fx = fixture(0.25, n_cfg, 100);
        group.bench_with_input(BenchmarkId::from_parameter(n_cfg * n_cfg), &fx, |b, fx| b.iter(|| fx.table()));
    }
    group.finish();

    let fx = fixture(0.25, 10, 100);
    c.bench_function("qfi_table/10x100", |b| b.iter(|| qfi_table(&fx.channel, &fx.inputs, black_box(&fx.thetas))));
}

fn designs(c: &mut Criterion) {
    for gamma in [0.0, 0.25] {
        let t = fixture(gamma, 10, 100).table();
        c.bench_function(&format!("average_case/gamma={gamma}"), |b| b.iter(|| average_case(black_box(&t))));
        c.bench_function(&format!("worst_case/gamma={gamma}"), |b| b.iter(|| worst_case(black_box(&t))));
    }

    let mut group = c.benchmark_group("solve_minimax");
    for n in [10, 30, 100] {
        let t = fixture(0.25, (n as f64).sqrt().ceil() as usize, n).table();
        let g: Vec<Vec<f64>> = (0..t.n_configs()).map(|k| t.row(k).to_vec()).collect();
        group.bench_with_input(BenchmarkId::from_parameter(format!("{}x{n}", g.len())), &g, |b, g| {
            b.iter(|| solve_minimax(g))
        });
    }
    group.finish();
}

criterion_group!(benches, table, designs);
criterion_main!(benches);
