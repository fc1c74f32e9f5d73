"""
URL patterns for the workbench API
"""

from django.urls import path
from .views import (
    AqecView,
    CodewordsView,
    HealthView,
    RatesView,
    ReproView,
    RunsView,
    StabilizersView,
    SyndromeTableView,
)

urlpatterns = [
    path('health/', HealthView.as_view(), name='health'),
    path('codes/<int:w>/<int:K>/codewords/', CodewordsView.as_view(), name='codewords'),
    path('codes/<int:w>/<int:K>/stabilizers/', StabilizersView.as_view(), name='stabilizers'),
    path('codes/<int:w>/<int:K>/syndrome-table/', SyndromeTableView.as_view(), name='syndrome-table'),
    path('codes/<int:w>/<int:K>/aqec/', AqecView.as_view(), name='aqec'),
    path('rates/', RatesView.as_view(), name='rates'),
    path('repro/<str:table_id>/', ReproView.as_view(), name='repro'),
    path('runs/', RunsView.as_view(), name='runs'),
]
