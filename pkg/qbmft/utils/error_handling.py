"""
Standardized error handling utilities for the qbmft toolkit
Provides a consistent error body, exit-code mapping and logging across all subcommands
"""

import json
import logging
import sys
import time
import traceback
from functools import wraps

import click

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_STATISTICAL = 4


class QBMError(Exception):
    """Base error with exit code and module-tagged context"""
    def __init__(self, message: str, exit_code: int = EXIT_NUMERICAL, error_code: str = None,
                 details: dict = None, module: str = None):
        super().__init__(message)
        self.message = message
        self.exit_code = exit_code
        self.error_code = error_code or "numerical_error"
        self.details = dict(details or {})
        if module:
            self.details['module'] = module
        self.details.setdefault('module', 'qbmft')

    def __str__(self):
        return f"[{self.details['module']}] {self.message}"


class ConfigError(QBMError):
    """Invalid or incomplete experiment configuration"""
    def __init__(self, message: str, field_errors: list = None, details: dict = None):
        details = dict(details or {})
        if field_errors:
            details['field_errors'] = list(field_errors)
        super().__init__(message, EXIT_CONFIG, "config_error", details, module='cli')
        self.field_errors = list(field_errors or [])


class DomainError(QBMError):
    """Argument outside the domain of an operation"""
    def __init__(self, message: str, module: str, details: dict = None):
        super().__init__(message, EXIT_NUMERICAL, "domain_error", details, module)


class LocalKernelError(QBMError):
    """Pointwise value requested for the distributional (local) Ohmic kernel"""
    def __init__(self, message: str = "OhmicNoCutoff damping kernel is local (2*gamma0*delta(t)); use the Markovian path",
                 details: dict = None):
        super().__init__(message, EXIT_NUMERICAL, "local_kernel", details, module='bath')


class DivergenceError(QBMError):
    """Ultraviolet-divergent integral or sum"""
    def __init__(self, message: str, module: str, details: dict = None):
        super().__init__(message, EXIT_NUMERICAL, "uv_divergence", details, module)


class PoleError(QBMError):
    """Evaluation requested at a pole of a Laplace-domain function"""
    def __init__(self, s, module: str = 'greens', details: dict = None):
        details = dict(details or {})
        details['pole'] = [float(complex(s).real), float(complex(s).imag)]
        super().__init__(f"Denominator vanishes at s={complex(s):.6g}", EXIT_NUMERICAL, "pole", details, module)
        self.pole = complex(s)


class GridMismatchError(QBMError):
    """Tables built on incompatible time grids"""
    def __init__(self, message: str, module: str, details: dict = None):
        super().__init__(message, EXIT_NUMERICAL, "grid_mismatch", details, module)


class NumericalError(QBMError):
    """Numerical failure (non-convergence, indefinite forms, bad spectra)"""
    def __init__(self, message: str, module: str, details: dict = None):
        super().__init__(message, EXIT_NUMERICAL, "numerical_error", details, module)


class ConditioningError(QBMError):
    """Matrix not symmetric positive definite after regularization"""
    def __init__(self, message: str, module: str = 'dechist', details: dict = None):
        super().__init__(message, EXIT_NUMERICAL, "conditioning_error", details, module)


class StatisticalQualityError(QBMError):
    """Estimator quality below the configured threshold"""
    def __init__(self, message: str, details: dict = None):
        super().__init__(message, EXIT_STATISTICAL, "statistical_quality", details, module='mc')


def format_error_response(error: Exception, operation: str) -> dict:
    """
    Build the JSON error body for a failed operation

    Args:
        error: The raised exception
        operation: Name of the failing operation

    Returns:
        Error body dictionary
    """
    if isinstance(error, QBMError):
        return {
            'success': False,
            'operation': operation,
            'error_code': error.error_code,
            'exit_code': error.exit_code,
            'message': error.message,
            'details': error.details,
        }
    return {
        'success': False,
        'operation': operation,
        'error_code': 'unexpected_error',
        'exit_code': EXIT_NUMERICAL,
        'message': str(error),
        'details': {'module': 'qbmft', 'type': type(error).__name__},
    }


def handle_command_errors(operation_name: str = None):
    """
    Decorator for standardized subcommand error handling

    Args:
        operation_name: Name of the operation for error logging

    Returns:
        Decorated function that exits with the mapped code on failure
    """
    def decorator(f):
        @wraps(f)
        def wrapped_function(*args, **kwargs):
            operation = operation_name or f.__name__
            logger.info(f"Starting operation: {operation}")
            start_time = time.time()

            try:
                result = f(*args, **kwargs)
            except ConfigError as e:
                logger.warning(f"Config error in {operation}: {e}")
                for field_error in e.field_errors:
                    logger.warning(f"  {field_error}")
                _fail(e, operation)
            except StatisticalQualityError as e:
                logger.warning(f"Statistical quality failure in {operation}: {e}")
                _fail(e, operation)
            except QBMError as e:
                logger.error(f"Numerical failure in {operation}: {e}")
                _fail(e, operation)
            except Exception as e:
                logger.error(f"Unexpected error in {operation}: {e}")
                logger.error(f"Traceback: {traceback.format_exc()}")
                _fail(e, operation)

            duration = time.time() - start_time
            logger.info(f"Operation {operation} completed successfully in {duration:.3f}s")
            return result

        return wrapped_function
    return decorator


def _fail(error: Exception, operation: str):
    response = format_error_response(error, operation)
    click.echo(json.dumps(response, indent=2, sort_keys=True), err=True)
    ctx = click.get_current_context(silent=True)
    if ctx is not None:
        ctx.exit(response['exit_code'])
    sys.exit(response['exit_code'])
