"""Prompt text assets for the chat-model backend."""
