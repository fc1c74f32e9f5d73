"""
Celery tasks for fidelity sweeps and periodic re-certification
"""

import logging
from dataclasses import asdict

from celery import chord, group, shared_task
from django.conf import settings
from django.core.cache import cache
from django.db import transaction

from . import exports
from .cli import metric_row
from .codes import CodeSpec
from .exceptions import AdshorError
from .models import MetricRecord, VerificationRun
from .verify import (
    FidelityPoint,
    SLOPE_TOL,
    ce_certify,
    finish_sweep,
    overlap_matrix,
    rate_tables,
    residual_scaling,
    sweep_point,
)

logger = logging.getLogger(__name__)

REFERENCE_SPECS = [
    CodeSpec(1, 1),
    CodeSpec(1, 2),
    CodeSpec(2, 1),
    CodeSpec(2, 2),
    CodeSpec(1, 1, dual_rail=True),
    CodeSpec(1, 2, dual_rail=True),
]


def save_run(kind, spec, parameters, passed, summary, rows):
    """Store a run and its metric rows, then drop the cached run list."""
    with transaction.atomic():
        run = VerificationRun.objects.create(
            kind=kind,
            w=spec.w,
            K=spec.K,
            dual_rail=spec.dual_rail,
            parameters=exports.clean(parameters),
            passed=passed,
            summary=exports.clean(summary),
        )
        MetricRecord.objects.bulk_create([
            MetricRecord(
                run=run,
                gamma=row['gamma'],
                metric=row['metric'],
                value=row['value'],
                tolerance=row['tolerance'],
                passed=row['pass'],
            )
            for row in rows
        ])
    cache.delete(settings.ADSHOR_RUNS_CACHE_KEY)
    logger.info(f"Saved {kind} run {run.pk} for {spec.label}: {'pass' if passed else 'fail'}, {len(rows)} metrics")
    return run


@shared_task(bind=True, max_retries=3, default_retry_delay=60)
def sweep_gamma_point(self, w, K, dual_rail, gamma, backend='projector', rounds=1, variant='balanced', seed=None):
    """
    Worst-case fidelity of one code at one damping rate.
    Numerical failures are reported, not retried.
    """
    spec = CodeSpec(w, K, dual_rail)
    try:
        point = sweep_point(spec, gamma, backend, rounds, variant, seed=seed)
        return {"success": True, "point": asdict(point)}
    except AdshorError as e:
        logger.warning(f"Sweep point {spec.label} gamma={gamma} failed: {e}")
        return {"success": False, "gamma": gamma, "error": str(e)}
    except Exception as e:
        logger.error(f"Sweep point {spec.label} gamma={gamma} crashed: {e}")
        raise self.retry(exc=e)


@shared_task
def record_fidelity_sweep(results, w, K, dual_rail, backend='projector', rounds=1, variant='balanced'):
    """Chord callback: fit the sweep and persist it as one run."""
    spec = CodeSpec(w, K, dual_rail)
    points = [FidelityPoint(**r['point']) for r in results if r.get('success')]
    errors = [r for r in results if not r.get('success')]
    points.sort(key=lambda p: p.gamma, reverse=True)

    sweep = finish_sweep(spec, backend, variant, rounds, points)
    rows = [dict(zip(exports.SWEEP_HEADER, record)) for record in sweep.records()]
    summary = {
        'points': [asdict(p) for p in points],
        'errors': errors,
        'fit': asdict(sweep.fit) if sweep.fit else None,
    }
    if sweep.fit is not None:
        rows.append(metric_row(spec, None, 'infidelity_coefficient', sweep.fit.coefficient))
    run = save_run(
        VerificationRun.KIND_FIDELITY,
        spec,
        {'backend': backend, 'rounds': rounds, 'variant': variant},
        not errors and all(row['pass'] is not False for row in rows),
        summary,
        rows,
    )
    return {"success": True, "run_id": run.pk, "points": len(points), "errors": len(errors)}


def run_fidelity_sweep(w, K, dual_rail=False, gammas=None, backend='projector', rounds=1, variant='balanced', seed=None):
    """Fan one sweep out over the workers, one task per gamma."""
    gammas = settings.ADSHOR_FIT_GAMMA_GRID if gammas is None else gammas
    header = group(sweep_gamma_point.s(w, K, dual_rail, g, backend, rounds, variant, seed) for g in gammas)
    return chord(header)(record_fidelity_sweep.s(w, K, dual_rail, backend, rounds, variant))


def certify_aqec(spec):
    fit = residual_scaling(spec)
    rows = [metric_row(spec, g, 'residual', r) for g, r in zip(fit.gammas, fit.residuals)]
    step_zero = overlap_matrix(spec, fit.gammas[0]).step_zero_max
    rows.append(metric_row(spec, fit.gammas[0], 'step_zero_max', step_zero, 1e-12, step_zero <= 1e-12))
    rows.append(metric_row(spec, None, 'slope', fit.slope, SLOPE_TOL, fit.passes()))
    return save_run(VerificationRun.KIND_AQEC, spec, {'gammas': fit.gammas}, fit.passes() and step_zero <= 1e-12,
                    fit.to_json(), rows)


def certify_ce(spec):
    report = ce_certify(spec)
    rows = [metric_row(spec, None, 'ce_overlap_defect', report.overlap_defect, 1e-10, report.overlap_defect <= 1e-10),
            metric_row(spec, None, 'ce_phase_spread', report.phase_spread, 1e-10, report.phase_spread <= 1e-10)]
    return save_run(VerificationRun.KIND_CE, spec, {'gdt_grid': report.gdt_grid}, report.passed, report.to_json(), rows)


def certify_rates():
    table = rate_tables()
    fewer = sum(row.fewer_qubits for row in table)
    spec = CodeSpec(1, 1)
    rows = [metric_row(spec, None, 'fewer_qubit_rows', fewer, 0, fewer == 12)]
    return save_run(VerificationRun.KIND_RATES, spec, {}, fewer == 12, {'rows': [r.to_json() for r in table]}, rows)


@shared_task(bind=True, max_retries=3, default_retry_delay=60)
def certify_reference_codes(self):
    """
    Re-run the AQEC, CE and rate checks for the reference codes.
    Runs daily via Celery Beat.
    """
    logger.info("Starting reference code certification")
    try:
        runs = []
        for spec in REFERENCE_SPECS:
            runs.append(certify_aqec(spec))
            if spec.dual_rail:
                runs.append(certify_ce(spec))
        runs.append(certify_rates())

        failed = [str(run) for run in runs if not run.passed]
        if failed:
            logger.warning(f"Certification failures: {failed}")
        logger.info(f"Certification complete: {len(runs) - len(failed)}/{len(runs)} runs passed")
        return {
            "success": not failed,
            "runs": len(runs),
            "failed": failed,
        }
    except AdshorError as e:
        logger.error(f"Certification stopped: {e}")
        return {"success": False, "error": str(e)}
    except Exception as e:
        logger.error(f"Failed to certify reference codes: {e}")
        raise self.retry(exc=e)
