"""Вспомогательные модули: настройка логирования."""
