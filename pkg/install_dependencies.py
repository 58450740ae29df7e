#!/usr/bin/env python3
"""
Script para instalar as dependências do SwingROA
"""

import subprocess
import sys


def install_package(package):
    """Instala um pacote usando pip"""
    try:
        print(f"📥 Instalando {package}...")
        subprocess.check_call([sys.executable, "-m", "pip", "install", package])
        return True
    except subprocess.CalledProcessError as e:
        print(f"❌ Erro ao instalar {package}: {e}")
        return False


def check_package_installed(import_name):
    try:
        __import__(import_name)
        return True
    except ImportError:
        return False


def main():
    """Instala as dependências de cálculo, validação e testes"""
    print("📦 Verificando dependências do SwingROA...")

    # (nome no pip, nome de importação)
    packages = [
        ("numpy", "numpy"),
        ("scipy", "scipy"),
        ("pandas", "pandas"),
        ("scikit-learn", "sklearn"),
        ("joblib", "joblib"),
        ("networkx", "networkx"),
        ("pydantic", "pydantic"),
        ("python-dotenv", "dotenv"),
        ("pytest", "pytest"),
    ]

    failed = []
    for package_name, import_name in packages:
        if check_package_installed(import_name):
            print(f"✅ {package_name} já está instalado")
        elif install_package(package_name):
            print(f"✅ {package_name} instalado com sucesso")
        else:
            failed.append(package_name)

    if failed:
        print(f"\n❌ Falha ao instalar: {', '.join(failed)}")
        print("🔄 Alternativa: pip install -r requirements.txt")
        return False
    print("\n🎉 Todas as dependências foram instaladas com sucesso!")
    return True


if __name__ == "__main__":
    sys.exit(0 if main() else 1)
