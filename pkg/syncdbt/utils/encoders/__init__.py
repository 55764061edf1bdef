from .report_encoder import ReportEncoder

__all__ = ['ReportEncoder']
