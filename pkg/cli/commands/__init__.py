"""
Subcomandos da CLI; cada módulo expõe register() e run().
"""
