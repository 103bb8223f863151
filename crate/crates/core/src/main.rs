//! Command-line front end.
//!
//! Results go to stdout as JSON (the Allen table as text or CSV); a short
//! human report goes to stderr unless `--quiet`.  Exit codes: 0 success,
//! 1 negative verdict (invalid or non-eager problem, no solution, plan is
//! not a solution), 2 input error, 3 search budget exhausted.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use eagerline::bpmn;
use eagerline::dsl;
use eagerline::eager::RuleClassification;
use eagerline::lowerbound;
use eagerline::model::{validate_plan, Problem};
use eagerline::oracle;
use eagerline::planfile;
use eagerline::solver::{BuildError, Product, SolveBudget, SolveStatus};
use eagerline::words::render_word;
use eagerline::allen;

#[derive(Parser)]
#[command(name = "eagerline", version, about = "Eager-fragment timeline planning toolkit")]
struct Cli {
    /// Suppress the stderr report.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a problem and classify its rules.
    Check {
        problem: PathBuf,
        /// Write automaton drawings into this directory.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Decide plan existence and print a witness plan if one exists.
    Solve {
        problem: PathBuf,
        /// Also write the witness plan to this file.
        #[arg(long)]
        emit_plan: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
        /// State budget per automaton; env EAGERLINE_MAX_STATES, default 200000.
        #[arg(long)]
        max_states: Option<usize>,
        /// Word-length budget; env EAGERLINE_MAX_LEN, default 4096.
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Check a plan against a problem's rules.
    Verify { problem: PathBuf, plan: PathBuf },
    /// Print the interval-relation ambiguity table.
    AllenTable {
        /// CSV instead of aligned text.
        #[arg(long)]
        csv: bool,
        /// Use the touching-intervals encodings.
        #[arg(long)]
        reflexive: bool,
    },
    /// Certify the automaton state-count lower bound for size n.
    Lowerbound {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long)]
        csv: bool,
    },
    /// Compile a process tree to a planning problem.
    Bpmn {
        /// Tree JSON file; omit with --example for the built-in process.
        tree: Option<PathBuf>,
        /// Use the built-in worked example tree.
        #[arg(long)]
        example: bool,
        /// Print the compiled problem in problem-text form.
        #[arg(long)]
        emit_problem: bool,
        /// Solve the compiled problem.
        #[arg(long)]
        solve: bool,
        #[arg(long)]
        max_states: Option<usize>,
        #[arg(long)]
        max_len: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = cli.quiet;
    let code = match cli.cmd {
        Cmd::Check { problem, dot } => cmd_check(&problem, dot.as_deref(), quiet),
        Cmd::Solve { problem, emit_plan, dot, max_states, max_len } => cmd_solve(
            &problem,
            emit_plan.as_deref(),
            dot.as_deref(),
            budget(max_states, max_len),
            quiet,
        ),
        Cmd::Verify { problem, plan } => cmd_verify(&problem, &plan, quiet),
        Cmd::AllenTable { csv, reflexive } => cmd_allen(csv, reflexive),
        Cmd::Lowerbound { n, csv } => cmd_lowerbound(n, csv, quiet),
        Cmd::Bpmn { tree, example, emit_problem, solve, max_states, max_len } => cmd_bpmn(
            tree.as_deref(),
            example,
            emit_problem,
            solve,
            budget(max_states, max_len),
            quiet,
        ),
    };
    ExitCode::from(code)
}

fn budget(max_states: Option<usize>, max_len: Option<usize>) -> SolveBudget {
    let env = |name: &str| {
        std::env::var(name)
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
    };
    let default = SolveBudget::default();
    SolveBudget {
        max_states: max_states
            .or_else(|| env("EAGERLINE_MAX_STATES"))
            .unwrap_or(default.max_states),
        max_len: max_len
            .or_else(|| env("EAGERLINE_MAX_LEN"))
            .unwrap_or(default.max_len),
    }
}

fn report(quiet: bool, text: &str) {
    if !quiet {
        eprintln!("{text}");
    }
}

fn fail_input(quiet: bool, message: &str) -> u8 {
    report(quiet, message);
    println!("{}", json!({ "error": message }));
    2
}

fn read_problem(path: &Path, quiet: bool) -> Result<Problem, u8> {
    let text = fs::read_to_string(path)
        .map_err(|e| fail_input(quiet, &format!("cannot read {}: {e}", path.display())))?;
    dsl::parse_problem(&text)
        .map_err(|e| fail_input(quiet, &format!("{}: {e}", path.display())))
}

fn classification_json(classes: &[RuleClassification]) -> serde_json::Value {
    json!(classes
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "eager": c.eager,
                "reasons": c.reasons(),
                "tokens": c.disjuncts.iter().flat_map(|d| &d.tokens).map(|t| {
                    json!({
                        "name": t.name,
                        "trigger": t.is_trigger,
                        "left": t.left,
                        "right": t.right,
                        "ambiguous": t.ambiguous(),
                    })
                }).collect::<Vec<_>>(),
            })
        })
        .collect::<Vec<_>>())
}

fn export_dot(product: &mut Product, dir: &Path, quiet: bool) -> Result<(), u8> {
    fs::create_dir_all(dir)
        .map_err(|e| fail_input(quiet, &format!("cannot create {}: {e}", dir.display())))?;
    let problem = product.problem.clone();
    let plan_dot = product.plans.render_dot(&problem);
    fs::write(dir.join("plan.dot"), plan_dot)
        .map_err(|e| fail_input(quiet, &format!("cannot write plan.dot: {e}")))?;
    for dag in &product.rules.dags {
        let path = dir.join(format!("rule_{}.dot", dag.name));
        fs::write(&path, dag.render_dot(&problem))
            .map_err(|e| fail_input(quiet, &format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_check(path: &Path, dot: Option<&Path>, quiet: bool) -> u8 {
    let p = match read_problem(path, quiet) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let issues: Vec<String> = eagerline::model::validate_problem(&p)
        .iter()
        .map(|v| v.to_string())
        .collect();
    if !issues.is_empty() {
        println!(
            "{}",
            json!({ "valid": false, "issues": issues, "eager": false })
        );
        report(quiet, &format!("invalid problem: {}", issues.join("; ")));
        return 1;
    }
    let classes = match eagerline::eager::classify_problem(&p) {
        Ok(c) => c,
        Err(e) => {
            println!("{}", json!({ "valid": false, "issues": [e.to_string()], "eager": false }));
            report(quiet, &e.to_string());
            return 1;
        }
    };
    let eager = eagerline::eager::all_eager(&classes);
    println!(
        "{}",
        json!({
            "valid": true,
            "issues": [],
            "eager": eager,
            "rules": classification_json(&classes),
        })
    );
    if let Some(dir) = dot {
        if eager {
            match Product::new(&p) {
                Ok(mut product) => {
                    if let Err(code) = export_dot(&mut product, dir, quiet) {
                        return code;
                    }
                }
                Err(e) => {
                    report(quiet, &format!("cannot draw automata: {e}"));
                    return 1;
                }
            }
        } else {
            report(quiet, "skipping --dot: problem is not eager");
        }
    }
    if eager {
        report(
            quiet,
            &format!("problem valid; {} rule(s), all eager", classes.len()),
        );
        0
    } else {
        let outside: Vec<&str> = classes
            .iter()
            .filter(|c| !c.eager)
            .map(|c| c.name.as_str())
            .collect();
        report(
            quiet,
            &format!("problem valid but outside the eager fragment: {}", outside.join(", ")),
        );
        1
    }
}

fn cmd_solve(
    path: &Path,
    emit_plan: Option<&Path>,
    dot: Option<&Path>,
    budget: SolveBudget,
    quiet: bool,
) -> u8 {
    let p = match read_problem(path, quiet) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let mut product = match Product::new(&p) {
        Ok(product) => product,
        Err(e @ (BuildError::Invalid(_) | BuildError::NotEager(_) | BuildError::Dag(_))) => {
            println!("{}", json!({ "status": "refused", "reason": e.to_string() }));
            report(quiet, &e.to_string());
            return 1;
        }
    };
    if let Some(dir) = dot {
        if let Err(code) = export_dot(&mut product, dir, quiet) {
            return code;
        }
    }
    let outcome = product.find_solution(&budget);
    let stats = json!({
        "product_states": outcome.stats.states,
        "edges": outcome.stats.edges,
        "depth": outcome.stats.depth,
    });
    match outcome.status {
        SolveStatus::Solution => {
            let word = outcome.word.unwrap();
            let plan = outcome.plan.unwrap();
            if let Some(out) = emit_plan {
                let text = format!("{}\n", planfile::render_plan(&p, &plan));
                if let Err(e) = fs::write(out, text) {
                    return fail_input(quiet, &format!("cannot write {}: {e}", out.display()));
                }
            }
            println!(
                "{}",
                json!({
                    "status": "solution",
                    "horizon": plan.horizon,
                    "word": render_word(&p, &word),
                    "plan": planfile::to_doc(&p, &plan),
                    "stats": stats,
                })
            );
            report(
                quiet,
                &format!(
                    "solution with horizon {} ({} product states explored)",
                    plan.horizon, outcome.stats.states
                ),
            );
            0
        }
        SolveStatus::Empty => {
            println!("{}", json!({ "status": "empty", "stats": stats }));
            report(quiet, "no solution exists");
            1
        }
        SolveStatus::BudgetExhausted => {
            println!("{}", json!({ "status": "budget_exhausted", "stats": stats }));
            report(
                quiet,
                &format!(
                    "undecided within budget (max_states {}, max_len {})",
                    budget.max_states, budget.max_len
                ),
            );
            3
        }
    }
}

fn cmd_verify(problem_path: &Path, plan_path: &Path, quiet: bool) -> u8 {
    let p = match read_problem(problem_path, quiet) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let issues: Vec<String> = eagerline::model::validate_problem(&p)
        .iter()
        .map(|v| v.to_string())
        .collect();
    if !issues.is_empty() {
        println!("{}", json!({ "solution": false, "problem_issues": issues }));
        report(quiet, &format!("invalid problem: {}", issues.join("; ")));
        return 1;
    }
    let plan_text = match fs::read_to_string(plan_path) {
        Ok(t) => t,
        Err(e) => return fail_input(quiet, &format!("cannot read {}: {e}", plan_path.display())),
    };
    let plan = match planfile::parse_plan(&p, &plan_text) {
        Ok(plan) => plan,
        Err(e) => return fail_input(quiet, &format!("{}: {e}", plan_path.display())),
    };
    let rules = match eagerline::model::bind_all(&p) {
        Ok(r) => r,
        Err(e) => {
            println!("{}", json!({ "solution": false, "problem_issues": [e.to_string()] }));
            report(quiet, &e.to_string());
            return 1;
        }
    };
    let plan_issues = validate_plan(&p, &plan);
    let failures = if plan_issues.is_empty() {
        oracle::verify_solution(&plan, &rules)
    } else {
        Vec::new()
    };
    let ok = plan_issues.is_empty() && failures.is_empty();
    println!(
        "{}",
        json!({
            "solution": ok,
            "plan_issues": plan_issues,
            "rule_failures": failures.iter().map(|f| json!({
                "rule": f.rule,
                "trigger_token": f.trigger_token,
            })).collect::<Vec<_>>(),
        })
    );
    if ok {
        report(quiet, "plan satisfies every rule");
        0
    } else if !plan_issues.is_empty() {
        report(quiet, &format!("plan malformed: {}", plan_issues.join("; ")));
        1
    } else {
        let names: Vec<&str> = failures.iter().map(|f| f.rule.as_str()).collect();
        report(quiet, &format!("plan violates: {}", names.join(", ")));
        1
    }
}

fn cmd_allen(csv: bool, reflexive: bool) -> u8 {
    let rows = allen::allen_table(!reflexive);
    if csv {
        print!("{}", allen::render_csv(&rows));
    } else {
        print!("{}", allen::render_text(&rows));
    }
    0
}

fn cmd_lowerbound(n: usize, csv: bool, quiet: bool) -> u8 {
    if n == 0 || n > 5 {
        return fail_input(quiet, "supported sizes are 1 through 5");
    }
    let r = lowerbound::count_distinguished(n);
    if csv {
        print!("{}", lowerbound::csv_report(&[r.clone()]));
    } else {
        println!(
            "{}",
            json!({
                "n": r.n,
                "subset_size": r.subset_size,
                "classes": r.classes.to_string(),
                "threshold": r.threshold.to_string(),
                "verified_pairs": r.pairs_certified,
                "millis": r.millis as u64,
            })
        );
    }
    report(
        quiet,
        &format!(
            "distinguished {} residual classes (threshold {}) via {} certified pairs",
            r.classes, r.threshold, r.pairs_certified
        ),
    );
    0
}

fn cmd_bpmn(
    tree_path: Option<&Path>,
    example: bool,
    emit_problem: bool,
    solve: bool,
    budget: SolveBudget,
    quiet: bool,
) -> u8 {
    let tree = match (tree_path, example) {
        (Some(path), false) => {
            let text = match fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return fail_input(quiet, &format!("cannot read {}: {e}", path.display())),
            };
            match bpmn::from_json(&text) {
                Ok(tree) => tree,
                Err(e) => return fail_input(quiet, &format!("{}: {e}", path.display())),
            }
        }
        (None, true) => bpmn::ed_tree(),
        _ => return fail_input(quiet, "pass exactly one of a tree file or --example"),
    };
    let compiled = match bpmn::compile(&tree) {
        Ok(c) => c,
        Err(e) => return fail_input(quiet, &e.to_string()),
    };
    if emit_problem {
        print!("{}", dsl::render_problem(&compiled.problem));
        report(quiet, &format!("compiled {} blocks", compiled.block_ids.len()));
        return 0;
    }
    let classes = match eagerline::eager::classify_problem(&compiled.problem) {
        Ok(c) => c,
        Err(e) => return fail_input(quiet, &e.to_string()),
    };
    let eager = eagerline::eager::all_eager(&classes);
    if solve {
        let mut product = match Product::new(&compiled.problem) {
            Ok(p) => p,
            Err(e) => {
                println!("{}", json!({ "status": "refused", "reason": e.to_string() }));
                report(quiet, &e.to_string());
                return 1;
            }
        };
        let outcome = product.find_solution(&budget);
        let stats = json!({
            "product_states": outcome.stats.states,
            "edges": outcome.stats.edges,
            "depth": outcome.stats.depth,
        });
        return match outcome.status {
            SolveStatus::Solution => {
                let plan = outcome.plan.unwrap();
                println!(
                    "{}",
                    json!({
                        "status": "solution",
                        "root": compiled.root,
                        "horizon": plan.horizon,
                        "plan": planfile::to_doc(&compiled.problem, &plan),
                        "stats": stats,
                    })
                );
                report(quiet, &format!("process schedulable with horizon {}", plan.horizon));
                0
            }
            SolveStatus::Empty => {
                println!("{}", json!({ "status": "empty", "stats": stats }));
                report(quiet, "process admits no execution");
                1
            }
            SolveStatus::BudgetExhausted => {
                println!("{}", json!({ "status": "budget_exhausted", "stats": stats }));
                report(quiet, "undecided within budget");
                3
            }
        };
    }
    println!(
        "{}",
        json!({
            "root": compiled.root,
            "blocks": compiled.block_ids,
            "variables": compiled.problem.vars.iter().map(|v| v.name.clone()).collect::<Vec<_>>(),
            "rules": compiled.problem.rules.len(),
            "eager": eager,
        })
    );
    report(
        quiet,
        &format!(
            "compiled {} blocks into {} variables and {} rules",
            compiled.block_ids.len(),
            compiled.problem.vars.len(),
            compiled.problem.rules.len()
        ),
    );
    0
}
