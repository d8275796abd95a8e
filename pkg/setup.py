#!/usr/bin/env python3
"""
Empaquetado de httool: transformadas de colas pesadas y diagnósticos asintóticos
Instala el paquete y expone el comando de consola `httool`
"""
from pathlib import Path
from setuptools import find_packages, setup

BASE_DIR = Path(__file__).resolve().parent


def leer_requisitos():
    """Leer las dependencias desde requirements.txt"""
    lineas = (BASE_DIR / 'requirements.txt').read_text().splitlines()
    return [linea.strip() for linea in lineas if linea.strip() and not linea.startswith('#')]


setup(
    name='httool',
    version='0.1.0',
    description='Transformadas de momentos truncados, integrales de cola y Williamson con diagnósticos de variación regular',
    long_description=(BASE_DIR / 'README.md').read_text(encoding='utf-8'),
    long_description_content_type='text/markdown',
    packages=find_packages(exclude=['examples', 'examples.*']),
    include_package_data=True,
    python_requires='>=3.9',
    install_requires=leer_requisitos(),
    entry_points={
        'console_scripts': [
            'httool = httool.cli:main',
        ],
    },
)
