from .app import ServiceHandle, ServiceState, create_app, negotiate, serve
from .fair import FairReport, fair_report

__all__ = ["FairReport", "ServiceHandle", "ServiceState", "create_app", "fair_report", "negotiate", "serve"]
