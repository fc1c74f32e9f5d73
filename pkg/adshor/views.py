"""
Read-only JSON API over the workbench reports
"""

import logging
from datetime import datetime

from django.conf import settings
from django.core.cache import cache
from rest_framework import status
from rest_framework.response import Response
from rest_framework.views import APIView

from . import exports
from .cli import RunConfig, run
from .exceptions import AdshorError
from .models import VerificationRun

logger = logging.getLogger(__name__)


class HealthView(APIView):
    """Health check endpoint"""

    def get(self, request):
        return Response({
            "status": "healthy",
            "service": "adshor",
            "timestamp": datetime.now().isoformat()
        })


class ReportView(APIView):
    """
    Runs one workbench command and caches the report.

    Subclasses set ``subcommand``; the code comes from the URL and the
    ``dual_rail`` and ``gamma`` query parameters.
    """

    subcommand = None
    uses_gamma = False

    def config(self, request, **kwargs):
        options = {
            'w': kwargs.get('w', 1),
            'K': kwargs.get('K', 1),
            'dual_rail': request.query_params.get('dual_rail') in ('1', 'true'),
        }
        if self.uses_gamma and request.query_params.get('gamma'):
            options['gamma'] = float(request.query_params['gamma'])
        if kwargs.get('table_id'):
            options['table_id'] = kwargs['table_id'].upper()
        return RunConfig.from_options(self.subcommand, options)

    def get(self, request, **kwargs):
        try:
            config = self.config(request, **kwargs)
        except ValueError as e:
            return Response({
                "success": False,
                "error": str(e)
            }, status=status.HTTP_400_BAD_REQUEST)

        cache_key = f"adshor:{self.subcommand}:{exports.to_json(config.to_json(), indent=None)}"
        cached_data = cache.get(cache_key)
        if cached_data:
            cached_data['cached'] = True
            return Response(cached_data)

        try:
            report = run(config)
        except ValueError as e:
            return Response({
                "success": False,
                "error": str(e)
            }, status=status.HTTP_400_BAD_REQUEST)
        except AdshorError as e:
            return Response({
                "success": False,
                "error": str(e)
            }, status=status.HTTP_422_UNPROCESSABLE_ENTITY)
        except Exception as e:
            logger.error(f"{self.subcommand} report failed: {e}")
            return Response({
                "success": False,
                "error": str(e)
            }, status=status.HTTP_500_INTERNAL_SERVER_ERROR)

        response_data = {
            "success": True,
            "cached": False,
            "passed": report.passed,
            "failures": report.failures,
            "report": exports.clean(report.payload),
        }
        cache.set(cache_key, response_data, settings.ADSHOR_REPORT_CACHE_TTL)
        return Response(response_data)


class CodewordsView(ReportView):
    subcommand = 'codewords'


class StabilizersView(ReportView):
    subcommand = 'stabilizers'


class SyndromeTableView(ReportView):
    subcommand = 'syndrome_table'


class AqecView(ReportView):
    """Overlap structure at ?gamma=, or the residual slope over the default grid."""
    subcommand = 'verify_aqec'
    uses_gamma = True


class RatesView(ReportView):
    subcommand = 'rates'


class ReproView(ReportView):
    subcommand = 'repro'
    uses_gamma = True


class RunsView(APIView):
    """
    Latest persisted verification runs.
    Cached until the next run is saved.
    """

    LIMIT = 50

    def get(self, request):
        cached_data = cache.get(settings.ADSHOR_RUNS_CACHE_KEY)
        if cached_data:
            return Response(cached_data)

        runs = VerificationRun.objects.prefetch_related('metrics')[:self.LIMIT]
        response_data = {
            "success": True,
            "runs_count": len(runs),
            "runs": [
                {
                    "id": record.pk,
                    "kind": record.kind,
                    "spec": record.label,
                    "passed": record.passed,
                    "parameters": record.parameters,
                    "created_at": record.created_at.isoformat(),
                    "metrics": [metric.to_row() for metric in record.metrics.all()],
                }
                for record in runs
            ],
        }
        cache.set(settings.ADSHOR_RUNS_CACHE_KEY, response_data, settings.ADSHOR_REPORT_CACHE_TTL)
        return Response(response_data)
