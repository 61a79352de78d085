"""Обработчики подкоманд CLI."""
