"""
URL configuration for the AD Shor code workbench
"""

from django.urls import path, include

urlpatterns = [
    path('', include('adshor.urls')),
]
