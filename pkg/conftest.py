"""Configuración de Django para ejecutar los tests con pytest (igual que manage.py)"""
import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'httool.settings')
django.setup()
