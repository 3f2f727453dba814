"""HTTP service exposing trained bundles for prediction and explanation."""

from autorater.service.app import create_app

__all__ = ["create_app"]
