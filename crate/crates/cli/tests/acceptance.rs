//! Acceptance suite. Each test covers one numbered criterion, enforces its
//! runtime budget, and prints one pass/fail line; run with `--nocapture` to
//! see the lines.

// Golden formulas are kept in the shape they are stated in.
#![allow(clippy::manual_div_ceil, clippy::type_complexity, clippy::needless_range_loop)]

use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kakeya_core::geometry::{Line, Point};
use kakeya_core::gf::Field;
use kakeya_core::kakeya::{
    bounds, construct_almost_kakeya_odd, construct_kakeya_recursive, is_almost_kakeya, is_kakeya,
    minimal_kakeya_2d, recursive_expectation_bound, PointSet, ShiftStrategy,
};
use kakeya_core::poly::{compositions, MultiIndex, Polynomial};
use kakeya_core::proofcheck::{
    dim_v_closed_form, monomial_set_3d, monomial_set_general, polytope_count,
    polytope_volume_exact, verify_lemma_3dim, verify_zero_lemma, ConditionRow, ConditionSystem,
    PolytopeRegion, RegionKind, RowTag,
};
use kakeya_core::rational::from_u64;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    started: Instant,
    failures: Vec<String>,
}

impl Criterion {
    fn start(id: u32, name: &'static str, budget_secs: u64) -> Criterion {
        Criterion {
            id,
            name,
            budget: Duration::from_secs(budget_secs),
            started: Instant::now(),
            failures: Vec::new(),
        }
    }

    fn expect(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(detail());
        }
    }

    fn finish(mut self) {
        let elapsed = self.started.elapsed();
        if elapsed > self.budget {
            self.failures.push(format!(
                "runtime {elapsed:?} exceeds budget {:?}",
                self.budget
            ));
        }
        let verdict = if self.failures.is_empty() {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "criterion {:2} ({}): {verdict} [{:.3}s]",
            self.id,
            self.name,
            elapsed.as_secs_f64()
        );
        assert!(
            self.failures.is_empty(),
            "criterion {} failed:\n  {}",
            self.id,
            self.failures.join("\n  ")
        );
    }
}

fn rat(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn f(q: u64) -> Field {
    Field::new(q).unwrap()
}

fn random_poly(
    rng: &mut ChaCha8Rng,
    field: &Field,
    nvars: usize,
    max_terms: usize,
    max_total_deg: u32,
) -> Polynomial {
    let per_var = (max_total_deg / nvars as u32).max(1);
    let nterms = rng.gen_range(0..=max_terms);
    let terms = (0..nterms).map(|_| {
        let alpha = MultiIndex::new((0..nvars).map(|_| rng.gen_range(0..=per_var)).collect());
        (alpha, rng.gen_range(0..field.q()))
    });
    Polynomial::from_terms(field.clone(), nvars, terms)
}

#[test]
fn criterion_01_bound_table_reproduction() {
    let mut c = Criterion::start(1, "bound table reproduction", 1);
    // Hand-entered golden values: (q, n, dkss, new).
    let golden: &[(u64, u32, (u64, u64), (u64, u64))] = &[
        (2, 2, (16, 9), (8, 3)),
        (2, 3, (64, 27), (32, 9)),
        (2, 4, (256, 81), (128, 27)),
        (3, 2, (81, 25), (27, 5)),
        (3, 3, (729, 125), (243, 25)),
        (3, 4, (6561, 625), (2187, 125)),
        (4, 2, (256, 49), (64, 7)),
        (4, 3, (4096, 343), (1024, 49)),
        (4, 4, (65536, 2401), (16384, 343)),
        (5, 2, (625, 81), (125, 9)),
        (5, 3, (15625, 729), (3125, 81)),
        (5, 4, (390625, 6561), (78125, 729)),
        (7, 2, (2401, 169), (343, 13)),
        (7, 3, (117649, 2197), (16807, 169)),
        (7, 4, (5764801, 28561), (823543, 2197)),
        (9, 2, (6561, 289), (729, 17)),
        (9, 3, (531441, 4913), (59049, 289)),
        (9, 4, (43046721, 83521), (4782969, 4913)),
    ];
    let thm3: &[(u64, (u64, u64))] = &[
        (2, (5, 2)),
        (3, (15, 2)),
        (4, (17, 1)),
        (5, (65, 2)),
        (7, (175, 2)),
        (9, (369, 2)),
    ];
    let sharp: &[(u64, u64)] = &[(2, 3), (3, 7), (4, 10), (5, 17), (7, 31), (9, 49)];

    for &(q, n, (dn, dd), (nn, nd)) in golden {
        let report = bounds(q, n).unwrap();
        c.expect(report.dkss == rat(dn, dd), || {
            format!("dkss({q},{n}) = {}, want {dn}/{dd}", report.dkss)
        });
        c.expect(report.new_bound == rat(nn, nd), || {
            format!("new({q},{n}) = {}, want {nn}/{nd}", report.new_bound)
        });
        let ratio = &report.new_bound / &report.dkss;
        c.expect(ratio == rat(2 * q - 1, q), || {
            format!("ratio({q},{n}) = {ratio}, want (2q-1)/q")
        });
    }
    for &(q, (tn, td)) in thm3 {
        let report = bounds(q, 3).unwrap();
        c.expect(report.thm3 == Some(rat(tn, td)), || {
            format!("thm3({q}) = {:?}, want {tn}/{td}", report.thm3)
        });
    }
    for &(q, s) in sharp {
        let report = bounds(q, 2).unwrap();
        c.expect(report.sharp_2d == Some(s), || {
            format!("sharp_2d({q}) = {:?}, want {s}", report.sharp_2d)
        });
    }
    c.finish();
}

#[test]
fn criterion_02_construction_sizes() {
    let mut c = Criterion::start(2, "almost-Kakeya construction sizes", 10);
    for q in [3u64, 5, 7] {
        for n in [2usize, 3] {
            let field = f(q);
            let (set, _) = construct_almost_kakeya_odd(&field, n).unwrap();
            let expected = q * ((q + 1) / 2).pow(n as u32 - 1);
            c.expect(set.len() as u64 == expected, || {
                format!("size(q={q}, n={n}) = {}, want {expected}", set.len())
            });
            let verdict = is_almost_kakeya(&set).unwrap();
            c.expect(verdict.is_covered(), || {
                format!("construction at q={q}, n={n} is not almost Kakeya")
            });
        }
    }
    c.finish();
}

#[test]
fn criterion_03_minimal_2d_search() {
    let mut c = Criterion::start(3, "exhaustive 2-D minima", 60);
    for (q, expected) in [(2u64, 3u64), (3, 7), (4, 10), (5, 17)] {
        let field = f(q);
        let (minimum, example) = minimal_kakeya_2d(&field).unwrap();
        c.expect(minimum == expected, || {
            format!("minimum(q={q}) = {minimum}, want {expected}")
        });
        c.expect(example.len() as u64 == minimum, || {
            format!("example size mismatch at q={q}")
        });
        c.expect(is_kakeya(&example).unwrap().is_covered(), || {
            format!("minimal example at q={q} is not Kakeya")
        });
        let base = q * (q + 1) / 2;
        let formula = if q % 2 == 0 { base } else { base + (q - 1) / 2 };
        c.expect(minimum == formula, || {
            format!("minimum(q={q}) does not match the parity formula")
        });
    }
    c.finish();
}

#[test]
fn criterion_04_recursive_construction() {
    let mut c = Criterion::start(4, "recursive Kakeya construction", 60);
    for (q, n) in [(3u64, 2usize), (5, 2), (3, 3)] {
        let field = f(q);
        let set = construct_kakeya_recursive(&field, n, ShiftStrategy::Exhaustive).unwrap();
        c.expect(is_kakeya(&set).unwrap().is_covered(), || {
            format!("recursive set at q={q}, n={n} is not Kakeya")
        });
        let (kprime, _) = construct_almost_kakeya_odd(&field, n).unwrap();
        let prev = construct_kakeya_recursive(&field, n - 1, ShiftStrategy::Exhaustive).unwrap();
        let bound =
            recursive_expectation_bound(kprime.len() as u64, prev.len() as u64, set.domain());
        c.expect(from_u64(set.len() as u64) <= bound, || {
            format!(
                "size {} at q={q}, n={n} exceeds the expectation bound {bound}",
                set.len()
            )
        });
    }
    c.finish();
}

#[test]
fn criterion_05_order2_kernel_triviality() {
    let mut c = Criterion::start(5, "order-2 kernel triviality", 30);
    fn run(c: &mut Criterion, label: &str, set: &PointSet) {
        let report = verify_lemma_3dim(set).unwrap();
        c.expect(report.kernel_trivial, || {
            format!("{label}: kernel_dim = {}", report.kernel_dim)
        });
        c.expect(report.corollary_ok, || {
            format!(
                "{label}: 4|K| = {} < dim V = {}",
                report.conditions, report.dim_v
            )
        });
    }
    run(&mut c, "F_2^3", &PointSet::full_space(f(2), 3).unwrap());
    run(&mut c, "F_3^3", &PointSet::full_space(f(3), 3).unwrap());
    let recursive = construct_kakeya_recursive(&f(3), 3, ShiftStrategy::Exhaustive).unwrap();
    run(&mut c, "recursive q=3", &recursive);

    // Basis sizes |A| behind the systems above.
    c.expect(monomial_set_3d(2).unwrap().len() == 12, || {
        "3-D basis at q=2 is not 12".to_string()
    });
    c.expect(monomial_set_3d(3).unwrap().len() == 36, || {
        "3-D basis at q=3 is not 36".to_string()
    });
    c.finish();
}

#[test]
fn criterion_06_basis_dimensions() {
    let mut c = Criterion::start(6, "basis sizes vs closed forms", 10);
    for q in [2u64, 3, 4, 5, 7] {
        let count = monomial_set_3d(q).unwrap().len() as u64;
        c.expect(count == q * q * q + q * q, || {
            format!("3-D basis at q={q}: {count}")
        });
    }
    for n in [1usize, 2, 3] {
        for q in [2u64, 3] {
            for r in [q, 2 * q] {
                let enumerated = monomial_set_general(n, q, r).unwrap().len() as u64;
                let closed = dim_v_closed_form(n, q, r).unwrap();
                c.expect(enumerated == closed, || {
                    format!("general basis n={n} q={q} r={r}: {enumerated} != {closed}")
                });
            }
        }
    }
    c.finish();
}

#[test]
fn criterion_07_polytope_machinery() {
    let mut c = Criterion::start(7, "polytope counts, identity, volumes", 10);
    for n in [2usize, 3] {
        for q in [2u64, 3] {
            // Pointwise disjoint-union identity at three scales.
            for r in [q, 2 * q, 4 * q] {
                let reg = |kind| PolytopeRegion::new(kind, n, q);
                let para = reg(RegionKind::Parallelogramoid);
                let cyl = reg(RegionKind::Cylinder);
                let s1 = reg(RegionKind::Simplex1);
                let s2 = reg(RegionKind::Simplex2);
                for w in 0..r {
                    for i in compositions(w, n - 1) {
                        for j in 0..=2 * r {
                            let a = para.contains(&i, j, r);
                            let b = s1.contains(&i, j, r);
                            let x = cyl.contains(&i, j, r);
                            let y = s2.contains(&i, j, r);
                            c.expect(!(a && b) && !(x && y) && (a || b) == (x || y), || {
                                format!("identity breaks at n={n} q={q} r={r} i={i:?} j={j}")
                            });
                        }
                    }
                }
            }
            // Exact volume identity and value.
            let vol = |kind| polytope_volume_exact(kind, n, q);
            let expected = rat((n as u64 - 1) * (q - 1), q)
                / BigRational::from_integer((1..=n as u64).product::<u64>().into());
            c.expect(vol(RegionKind::Parallelogramoid) == expected, || {
                format!("volume formula at n={n} q={q}")
            });
            c.expect(
                vol(RegionKind::Parallelogramoid)
                    == vol(RegionKind::Cylinder) - vol(RegionKind::Simplex1)
                        + vol(RegionKind::Simplex2),
                || format!("volume identity at n={n} q={q}"),
            );
            // Lattice-count convergence: |count/r^n - vol| <= 3n/r.
            let region = PolytopeRegion::new(RegionKind::Parallelogramoid, n, q);
            for r in [q, 2 * q, 4 * q] {
                let count = from_u64(polytope_count(&region, r));
                let rn = (0..n).fold(BigRational::from_integer(1.into()), |acc, _| {
                    acc * from_u64(r)
                });
                let diff = &count / &rn - vol(RegionKind::Parallelogramoid);
                let err = if diff < BigRational::from_integer(0.into()) {
                    -diff
                } else {
                    diff
                };
                c.expect(err <= rat(3 * n as u64, r), || {
                    format!("count/vol error {err} at n={n} q={q} r={r}")
                });
            }
        }
    }
    c.finish();
}

#[test]
fn criterion_08_zero_lemma_verification() {
    let mut c = Criterion::start(8, "order-(r, r') kernel triviality", 120);
    // F_2^2 at r = 2 with a derived selection.
    let set = PointSet::full_space(f(2), 2).unwrap();
    let report = verify_zero_lemma(&set, None, 2).unwrap();
    c.expect(report.kernel_trivial, || {
        format!("F_2^2 r=2: kernel_dim = {}", report.kernel_dim)
    });
    c.expect(report.dim_v_within_codim_bound, || {
        format!(
            "F_2^2 r=2: dim V = {} > codim bound {}",
            report.dim_v, report.codim_bound_total
        )
    });

    // The odd-q construction with its witness lines at r = 3.
    let field = f(3);
    let (set, witness) = construct_almost_kakeya_odd(&field, 2).unwrap();
    let report = verify_zero_lemma(&set, Some(&witness), 3).unwrap();
    c.expect(report.kernel_trivial, || {
        format!("almost GF(3) r=3: kernel_dim = {}", report.kernel_dim)
    });
    c.expect(report.dim_v_within_codim_bound, || {
        format!(
            "almost GF(3) r=3: dim V = {} > codim bound {}",
            report.dim_v, report.codim_bound_total
        )
    });
    c.finish();
}

#[test]
fn criterion_09_property_suites() {
    let mut c = Criterion::start(9, "randomized property suites", 120);

    // Suite a: Hasse derivatives match the shift-expansion oracle.
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    for case in 0..1000 {
        let q = [2u64, 3, 5][case % 3];
        let field = f(q);
        let nvars = rng.gen_range(1..=3);
        let p = random_poly(&mut rng, &field, nvars, 20, 8);
        let map = p.expand_shift_oracle().unwrap();
        let d = p.degree().unwrap_or(0);
        for w in 0..=d {
            for i in compositions(w, nvars) {
                let direct = p.hasse_derivative(&i).unwrap();
                let expected = map
                    .get(&i)
                    .cloned()
                    .unwrap_or_else(|| Polynomial::zero(field.clone(), nvars));
                c.expect(direct == expected, || {
                    format!("oracle mismatch: q={q} P={p} i={i}")
                });
            }
        }
    }

    // Suite b: vanishing order along a line dominates the multiplicity.
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    for case in 0..1000 {
        let q = [2u64, 3, 4, 5][case % 4];
        let field = f(q);
        let nvars = rng.gen_range(2..=3);
        let p = random_poly(&mut rng, &field, nvars, 10, 6);
        let mut dir: Vec<u64> = (0..nvars).map(|_| rng.gen_range(0..q)).collect();
        if dir.iter().all(|&x| x == 0) {
            dir[nvars - 1] = 1;
        }
        let base: Vec<u64> = (0..nvars).map(|_| rng.gen_range(0..q)).collect();
        let line = Line::new(
            &field,
            Point::new(base),
            kakeya_core::geometry::Direction::new(&field, dir),
        );
        let point = line.point_at(&field, rng.gen_range(0..q));
        let along = p.mult_along_line(&line, &point).unwrap();
        let at = p.multiplicity(&point).unwrap();
        c.expect(along >= at, || {
            format!("mult_line {along:?} < mult {at:?} for P={p} q={q}")
        });
    }

    // Suite c: vanishing order along a line is parameterization-invariant.
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    for case in 0..1000 {
        let q = [3u64, 5, 7][case % 3];
        let field = f(q);
        let p = random_poly(&mut rng, &field, 2, 8, 6);
        let base: Vec<u64> = (0..2).map(|_| rng.gen_range(0..q)).collect();
        let mut dir: Vec<u64> = (0..2).map(|_| rng.gen_range(0..q)).collect();
        if dir.iter().all(|&x| x == 0) {
            dir[1] = 1;
        }
        let lambda = rng.gen_range(1..q);
        let mu = rng.gen_range(0..q);
        let t = rng.gen_range(0..q);
        let reparam_base: Vec<u64> = base
            .iter()
            .zip(&dir)
            .map(|(&a, &b)| field.add(a, field.mul(b, mu)))
            .collect();
        let reparam_dir: Vec<u64> = dir.iter().map(|&b| field.mul(b, lambda)).collect();
        let original = p.restrict_affine(&base, &dir).unwrap();
        let reparam = p.restrict_affine(&reparam_base, &reparam_dir).unwrap();
        let t_orig = field.add(field.mul(lambda, t), mu);
        c.expect(
            original.multiplicity_at(t_orig) == reparam.multiplicity_at(t),
            || format!("reparameterization changes the order: P={p} q={q}"),
        );
    }

    // Suite d: generalized Schwartz-Zippel inequality.
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let mut done = 0;
    while done < 1000 {
        let q = [2u64, 3, 4, 5][done % 4];
        let field = f(q);
        let nvars = rng.gen_range(1..=3);
        // Keep d < q |S| with S the whole field.
        let max_deg = 6.min((q * q - 1) as u32);
        let p = random_poly(&mut rng, &field, nvars, 10, max_deg);
        if p.is_zero() {
            continue;
        }
        let subset: Vec<u64> = field.elements().collect();
        let audit = p.schwartz_zippel_audit(&subset).unwrap();
        c.expect(audit.ok, || {
            format!(
                "multiplicity sum {} exceeds bound {} for P={p} over GF({q})",
                audit.sum, audit.bound
            )
        });
        done += 1;
    }

    // Suite e: field axioms on random triples.
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let orders = [2u64, 3, 4, 5, 7, 8, 9, 16, 25, 27, 49];
    for case in 0..1000 {
        let q = orders[case % orders.len()];
        let field = f(q);
        let (a, b, x) = (
            rng.gen_range(0..q),
            rng.gen_range(0..q),
            rng.gen_range(0..q),
        );
        c.expect(
            field.add(field.add(a, b), x) == field.add(a, field.add(b, x))
                && field.mul(field.mul(a, b), x) == field.mul(a, field.mul(b, x))
                && field.mul(a, field.add(b, x)) == field.add(field.mul(a, b), field.mul(a, x))
                && field.add(a, b) == field.add(b, a)
                && field.mul(a, b) == field.mul(b, a)
                && field.add(a, field.neg(a)) == 0,
            || format!("axiom failure at q={q} a={a} b={b} c={x}"),
        );
        if a != 0 {
            c.expect(field.mul(a, field.inv(a).unwrap()) == 1, || {
                format!("inverse failure at q={q} a={a}")
            });
        }
    }

    // Suite f: rank is invariant under pivoting order, row permutation, and
    // row scaling. Oracle: elimination sweeping columns right to left.
    fn rank_oracle(field: &Field, rows: &[Vec<u64>]) -> usize {
        let mut m: Vec<Vec<u64>> = rows.to_vec();
        let ncols = m.first().map_or(0, Vec::len);
        let mut rank = 0;
        for col in (0..ncols).rev() {
            let Some(offset) = m[rank..].iter().rposition(|row| row[col] != 0) else {
                continue;
            };
            let prow = rank + offset;
            m.swap(rank, prow);
            let inv = field.inv(m[rank][col]).unwrap();
            let pivot: Vec<u64> = m[rank].iter().map(|&v| field.mul(v, inv)).collect();
            m[rank] = pivot;
            for i in (rank + 1)..m.len() {
                if m[i][col] != 0 {
                    let factor = m[i][col];
                    for t in 0..ncols {
                        let sub = field.mul(factor, m[rank][t]);
                        m[i][t] = field.sub(m[i][t], sub);
                    }
                }
            }
            rank += 1;
            if rank == m.len() {
                break;
            }
        }
        rank
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    for case in 0..1000 {
        let q = [2u64, 3, 5][case % 3];
        let field = f(q);
        let nrows = rng.gen_range(2..=8);
        let ncols = rng.gen_range(2..=8);
        let rows: Vec<Vec<u64>> = (0..nrows)
            .map(|_| (0..ncols).map(|_| rng.gen_range(0..q)).collect())
            .collect();
        let mut shuffled = rows.clone();
        for k in (1..shuffled.len()).rev() {
            shuffled.swap(k, rng.gen_range(0..=k));
        }
        let scaled: Vec<Vec<u64>> = shuffled
            .into_iter()
            .map(|row| {
                let s = rng.gen_range(1..q);
                row.into_iter().map(|v| field.mul(v, s)).collect()
            })
            .collect();
        let mut system = ConditionSystem::new(field.clone(), ncols);
        for coeffs in &rows {
            system.push(ConditionRow {
                coeffs: coeffs.clone(),
                tag: RowTag::Evaluation { point: vec![0] },
            });
        }
        let forward = system.rank();
        let oracle = rank_oracle(&field, &rows);
        let transformed = rank_oracle(&field, &scaled);
        c.expect(forward == oracle && oracle == transformed, || {
            format!("rank mismatch at q={q}: {forward} vs {oracle} vs {transformed}")
        });
    }

    c.finish();
}

#[test]
fn criterion_10_report_determinism() {
    let mut c = Criterion::start(10, "byte-identical report output", 60);
    let run = || {
        let out = Command::new(env!("CARGO_BIN_EXE_kakeya"))
            .args(["report", "--all", "--qmax", "5", "--nmax", "3"])
            .output()
            .expect("binary runs");
        assert!(out.status.success(), "report exits 0");
        out.stdout
    };
    let first = run();
    let second = run();
    c.expect(first == second, || {
        "two report runs differ byte-for-byte".to_string()
    });
    c.expect(!first.is_empty(), || "report produced no output".to_string());
    let text = String::from_utf8(first).unwrap();
    c.expect(
        text.starts_with("check,q,n,r,name,value,ok\n"),
        || "unexpected CSV header".to_string(),
    );
    c.finish();
}
