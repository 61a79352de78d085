"""Подкоманды CLI: prepare, solve, reference, sweep, verify. Каждая возвращает код выхода."""

import logging
from argparse import Namespace
from pathlib import Path

import storage
from config import ConfigError, RunConfig, load_run_config
from entropy_residual import certify_field, certify_limit
from estimates import SweepError, Tolerances, regularize_data, run_reports, run_sweep, solver_config
from grid_field import norm_linf
from handlers.common import (
    BOUNDS_CSV,
    CONVERGENCE_CSV,
    DETAILS_CSV,
    DIAGNOSTICS_CSV,
    ENTROPY_CSV,
    FIELD_CSV,
    META_CSV,
    REPORTS_CSV,
    SWEEP_REPORT_CSV,
    W11_CSV,
    build_problem,
    exit_code,
    load_solution,
    output_dir,
    require_hypothesis,
    run_meta,
    write_solution,
)
from mollify import mollify_flux, verify_mollifier_bounds, w11_error
from reference_oracle import reference_on_grid
from reports import all_passed
from utils.logging_setup import context_str
from viscous_solver import solve

logger = logging.getLogger(__name__)


def _load_config(args: Namespace, **overrides: object) -> RunConfig:
    """Конфигурация из --config (или значения по умолчанию) с переопределениями из флагов CLI."""
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if getattr(args, "config", None):
        return load_run_config(Path(args.config), **overrides)
    try:
        return RunConfig(**overrides)
    except TypeError as e:
        raise ConfigError(str(e)) from e


def prepare_command(args: Namespace) -> int:
    """
    Регуляризация начальных данных: поле u_{0ε} и CSV оценок сглаживания
    (гипотеза E: eps,sup_ratio,tv_ratio,c_eps; F: eps,linf,A,w11_error).
    """
    cfg = _load_config(args, data=args.data, eps=args.eps, n_cells=args.n_cells)
    problem = build_problem(cfg)
    data = problem.data
    if args.hypothesis and args.hypothesis != data.hypothesis:
        raise ConfigError(f"Данные {data.name!r} относятся к гипотезе {data.hypothesis}, запрошена {args.hypothesis}")
    require_hypothesis(problem)
    out = output_dir(cfg, args.out)
    grid = problem.grid
    eps_list = cfg.eps_list if (args.eps is None and cfg.eps_list) else (cfg.eps,)

    smooth = regularize_data(data, eps_list[-1], grid)
    storage.write_field_csv(out / FIELD_CSV, smooth)

    if data.hypothesis == "E":
        bounds = verify_mollifier_bounds(data, eps_list, grid, cfg.tol_mollifier, cfg.tol_uniform)
        storage.write_bounds_csv(out / BOUNDS_CSV, bounds.rows)
        rows = [(None, r) for r in bounds.reports]
        passed = bounds.passed
    else:
        A = data.A_bound if data.A_bound is not None else data.linf_bound + 1.0
        w11_rows = []
        for eps in eps_list:
            approx = smooth if eps == eps_list[-1] else regularize_data(data, eps, grid)
            w11_rows.append((eps, norm_linf(approx), A, w11_error(approx, data)))
        storage.write_w11_csv(out / W11_CSV, w11_rows)
        rows = []
        passed = all(linf <= A for _, linf, _, _ in w11_rows)
    storage.write_reports_csv(out / REPORTS_CSV, rows)
    logger.info("prepare завершён: %s", context_str(data=data.name, out=out, passed=passed))
    return exit_code(passed)


def solve_command(args: Namespace) -> int:
    """Одно вязкое решение при cfg.eps: срезы, диагностика шагов, отчёты об оценках."""
    cfg = _load_config(args)
    problem = build_problem(cfg)
    require_hypothesis(problem)
    out = output_dir(cfg, args.out)

    u0eps = regularize_data(problem.data, cfg.eps, problem.grid)
    result = solve(mollify_flux(problem.flux, cfg.eps), problem.visc, u0eps, solver_config(cfg, cfg.eps))
    reports = run_reports(result, problem.flux, problem.visc, problem.data, u0eps, Tolerances.from_config(cfg))
    rows = [(cfg.eps, r) for r in reports]

    write_solution(out, result.solution, run_meta(problem, eps=cfg.eps, kind="solve"))
    storage.write_diagnostics_csv(out / DIAGNOSTICS_CSV, result.diagnostics)
    storage.write_reports_csv(out / REPORTS_CSV, rows)
    storage.write_details_csv(out / DETAILS_CSV, rows)
    passed = all_passed(reports)
    logger.info("solve завершён: %s", context_str(out=out, steps=result.steps, passed=passed))
    return exit_code(passed)


def reference_command(args: Namespace) -> int:
    """Эталон Годунова на сетке в fine_factor раз мельче, осреднённый на сетку конфигурации."""
    cfg = _load_config(args)
    problem = build_problem(cfg)
    require_hypothesis(problem)
    out = output_dir(cfg, args.out)
    stf = reference_on_grid(problem.flux, problem.data, problem.grid, cfg.T, cfg.fine_factor)
    write_solution(out, stf, run_meta(problem, kind="reference", fine_factor=cfg.fine_factor))
    logger.info("reference завершён: %s", context_str(out=out, slices=len(stf.times)))
    return exit_code(True)


def sweep_command(args: Namespace) -> int:
    """Свип по eps_list: отчёты по каждому ε, сходимость и энтропийная сертификация предела."""
    cfg = _load_config(args)
    if not cfg.eps_list:
        raise ConfigError("Для sweep нужен ключ eps_list")
    problem = build_problem(cfg)
    require_hypothesis(problem)
    out = output_dir(cfg, args.out)

    try:
        sweep = run_sweep(problem.flux, problem.visc, problem.data, cfg.eps_list, cfg)
    except SweepError as e:
        # Частичные результаты сохраняются с пометкой partial, затем ошибка уходит в main
        if e.partial is not None:
            storage.write_reports_csv(out / SWEEP_REPORT_CSV, e.partial.report_rows())
            storage.write_meta_csv(out / META_CSV, run_meta(problem, kind="sweep", partial=True))
        raise
    rows = sweep.report_rows()
    storage.write_reports_csv(out / SWEEP_REPORT_CSV, rows)
    storage.write_details_csv(out / DETAILS_CSV, rows)
    storage.write_convergence_csv(out / CONVERGENCE_CSV, sweep)
    if sweep.hypothesis == "E":
        storage.write_bounds_csv(out / BOUNDS_CSV, [s.mollifier_row for s in sweep.summaries])
    write_solution(out, sweep.solutions[-1], run_meta(problem, eps=cfg.eps_list[-1], kind="sweep"))

    entropy = certify_limit(sweep, problem.flux, cfg.c_tol)
    storage.write_entropy_csv(out / ENTROPY_CSV, entropy)
    passed = sweep.passed and entropy.passed
    logger.info(
        "sweep завершён: %s",
        context_str(out=out, levels=len(sweep.eps_list), rate=sweep.oracle_rate(), passed=passed),
    )
    return exit_code(passed)


def verify_command(args: Namespace) -> int:
    """Энтропийная проверка сохранённого решения из папки --in."""
    in_dir = Path(args.in_dir)
    stf, flux, meta = load_solution(in_dir)
    c_tol = args.c_tol if args.c_tol is not None else float(meta.get("c_tol") or 5.0)
    report = certify_field(stf, flux, flux.interval, c_tol)
    target = Path(args.report) if args.report else Path(ENTROPY_CSV)
    if not target.is_absolute():
        target = in_dir / target
    storage.write_entropy_csv(target, report)
    logger.info("verify завершён: %s", context_str(report=target, passed=report.passed))
    return exit_code(report.passed)
