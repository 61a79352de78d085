"""Версия viscoflow. Единое место для номера релиза."""

__version__ = "0.1.1"
